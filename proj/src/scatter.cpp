#include "gkpforge/scatter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include <Eigen/Eigenvalues>

namespace gkpforge {

namespace {

using ColMap = Eigen::Map<CMatrix, 0, Eigen::OuterStride<>>;
using ConstColMap = Eigen::Map<const CMatrix, 0, Eigen::OuterStride<>>;

int positive_mod(long a, long m) { return static_cast<int>(((a % m) + m) % m); }

/// Columns belonging to photon number n of `mode`, as a strided view.
constexpr double kNegligibleElement = 1e-18;

/// expm of the truncated generator, exactly unitary on the cutoff space.
/// Mixture members reuse one coupling, so the last few are kept per thread.
const CMatrix& truncated_displacement(cplx g, int cutoff) {
  struct Entry {
    cplx g;
    int cutoff;
    CMatrix d;
  };
  thread_local std::deque<Entry> cache;
  for (const Entry& e : cache) {
    if (e.g == g && e.cutoff == cutoff) return e.d;
  }
  if (cache.size() >= 4) cache.pop_back();
  cache.push_front({g, cutoff, make_displacement_expm(g, cutoff).entries});
  return cache.front().d;
}

struct ModeColumns {
  int start_step;  // column offset per unit of n
  int count;       // spectator columns
  int stride;      // distance between spectator columns, in columns
};

ModeColumns mode_columns(const JointState& j, int mode) {
  const int d = j.photon_dim();
  if (mode < 0 || mode >= j.modes) throw Error("photon mode index out of range");
  if (j.modes == 1) return {1, 1, 1};
  if (mode == 0) return {d, d, 1};
  return {1, d, d};
}

ColMap cols_of(CMatrix& m, const ModeColumns& mc, int n) {
  return ColMap(m.data() + static_cast<Eigen::Index>(n) * mc.start_step * m.rows(), m.rows(),
                mc.count, Eigen::OuterStride<>(m.rows() * mc.stride));
}

ConstColMap cols_of(const CMatrix& m, const ModeColumns& mc, int n) {
  return ConstColMap(m.data() + static_cast<Eigen::Index>(n) * mc.start_step * m.rows(),
                     m.rows(), mc.count, Eigen::OuterStride<>(m.rows() * mc.stride));
}

std::pair<int, int> occupied_rows(const JointState& j) {
  int lo = -1, hi = -1;
  for (int r = 0; r < j.rows(); ++r) {
    if (j.amplitudes.row(r).squaredNorm() > 0.0) {
      if (lo < 0) lo = r;
      hi = r;
    }
  }
  return {lo, hi};
}

/// Pads an open window so every occupied row is at least `margin` rows from
/// both edges.
void grow_open(JointState& j, int margin) {
  if (j.boundary != Boundary::kOpen) return;
  auto [lo, hi] = occupied_rows(j);
  if (lo < 0) return;
  const int top = std::max(0, margin - lo);
  const int bottom = std::max(0, margin - (j.rows() - 1 - hi));
  if (top == 0 && bottom == 0) return;
  CMatrix grown = CMatrix::Zero(j.rows() + top + bottom, j.amplitudes.cols());
  grown.middleRows(top, j.rows()) = j.amplitudes;
  j.amplitudes = std::move(grown);
  j.first_index -= top;
}

CVector outer_photon(const PhotonState& a, const PhotonState& b, int cutoff) {
  const CVector va = a.resized(cutoff).amplitudes;
  const CVector vb = b.resized(cutoff).amplitudes;
  const int d = cutoff + 1;
  CVector out(d * d);
  for (int n0 = 0; n0 < d; ++n0) out.segment(n0 * d, d) = va[n0] * vb;
  return out;
}

JointState joint_from(const ElectronComb& comb, const CVector& photon, int modes, int cutoff,
                      Boundary boundary, int ring_size) {
  JointState j;
  j.modes = modes;
  j.cutoff = cutoff;
  j.boundary = boundary;
  if (boundary == Boundary::kOpen) {
    j.first_index = comb.first_index();
    j.amplitudes = comb.amplitudes * photon.transpose();
    return j;
  }
  if (comb.envelope.kind != EnvelopeKind::kIdeal) {
    throw Error("periodic ladders hold ideal combs only");
  }
  const int n = comb.spacing;
  int ring = ring_size > 0 ? ring_size : n * std::max(1, (comb.size() + n - 1) / n);
  if (ring % n != 0) throw Error("ring size must be a multiple of the comb spacing");
  CVector c = CVector::Zero(ring);
  const int shift = positive_mod(comb.center_offset, n);
  for (int r = shift; r < ring; r += n) c[r] = 1.0;
  c /= c.norm();
  j.first_index = 0;
  j.amplitudes = c * photon.transpose();
  return j;
}

/// (dst_row, src_row, length) runs for src = dst + s, wrapping on a ring.
std::vector<std::array<int, 3>> row_runs(int rows, int s, bool ring) {
  std::vector<std::array<int, 3>> runs;
  if (!ring) {
    const int d0 = std::max(0, -s);
    const int d1 = std::min(rows, rows - s);
    if (d1 > d0) runs.push_back({d0, d0 + s, d1 - d0});
    return runs;
  }
  const int sm = positive_mod(s, rows);
  if (sm == 0) {
    runs.push_back({0, 0, rows});
  } else {
    runs.push_back({0, sm, rows - sm});
    runs.push_back({rows - sm, 0, sm});
  }
  return runs;
}

/// Row twiddles e^{i e theta_j} with theta_j = 2 pi j / M, reduced exactly.
CVector row_twiddles(const JointState& j, int sample, int M) {
  CVector w(j.rows());
  for (int r = 0; r < j.rows(); ++r) {
    const long e = static_cast<long>(j.first_index) + r;
    w[r] = std::polar(1.0, 2.0 * kPi * positive_mod(e * sample, M) / M);
  }
  return w;
}

/// v -> D(|g| e^{i phi}) v using R(phi) D(|g|) R(-phi).
CVector rotated_apply(const CMatrix& real_d, double phi, const CVector& v) {
  const CVector r = rotation_phases(phi, static_cast<int>(v.size()) - 1);
  return r.cwiseProduct(real_d * r.conjugate().cwiseProduct(v));
}

CMatrix rotated_matrix(const CMatrix& real_d, double phi) {
  return rotate_displacement(real_d, phi);
}

}  // namespace

int JointState::photon_number(int mode, int col) const {
  const int d = photon_dim();
  if (modes == 1) return col;
  return mode == 0 ? col / d : col % d;
}

double JointState::total_excitation() const {
  double total = 0.0;
  for (int r = 0; r < rows(); ++r) {
    const double e = first_index + r;
    for (Eigen::Index c = 0; c < amplitudes.cols(); ++c) {
      const double p = std::norm(amplitudes(r, c));
      if (p == 0.0) continue;
      double n = e;
      for (int m = 0; m < modes; ++m) n += photon_number(m, static_cast<int>(c));
      total += n * p;
    }
  }
  return total / amplitudes.squaredNorm();
}

double JointState::photon_edge_population(int levels) const {
  double total = 0.0;
  for (Eigen::Index c = 0; c < amplitudes.cols(); ++c) {
    bool edge = false;
    for (int m = 0; m < modes; ++m) edge |= photon_number(m, static_cast<int>(c)) > cutoff - levels;
    if (edge) total += amplitudes.col(c).squaredNorm();
  }
  return total;
}

double JointState::ladder_edge_population(int edge_rows) const {
  if (boundary == Boundary::kPeriodic) return 0.0;
  const int k = std::min(edge_rows, rows());
  return amplitudes.topRows(k).squaredNorm() + amplitudes.bottomRows(k).squaredNorm();
}

JointState make_joint(const ElectronComb& comb, const PhotonState& photon, Boundary boundary,
                      int ring_size) {
  return joint_from(comb, photon.amplitudes, 1, photon.cutoff(), boundary, ring_size);
}

JointState make_joint(const ElectronComb& comb, const PhotonState& ph1, const PhotonState& ph2,
                      Boundary boundary, int ring_size) {
  const int cutoff = std::max(ph1.cutoff(), ph2.cutoff());
  return joint_from(comb, outer_photon(ph1, ph2, cutoff), 2, cutoff, boundary, ring_size);
}

void scatter_ladder(JointState& joint, cplx g, int mode) {
  if (g == 0.0) return;
  const int c = joint.cutoff;
  grow_open(joint, c);
  const CMatrix& d = truncated_displacement(g, c);
  const ModeColumns mc = mode_columns(joint, mode);
  const bool ring = joint.boundary == Boundary::kPeriodic;
  const CMatrix& in = joint.amplitudes;
  CMatrix out = CMatrix::Zero(in.rows(), in.cols());
  const int rows = joint.rows();

  if (mc.count == 1) {
    // Total excitation is conserved: block s gathers the amplitudes with
    // ladder row r and photon number n at r + n = s, and D acts inside each
    // block, so all blocks go through one matrix product.
    const int blocks = ring ? rows : rows + c;
    CMatrix u = CMatrix::Zero(c + 1, blocks);
    for (int n = 0; n <= c; ++n) {
      for (int r = 0; r < rows; ++r) u(n, ring ? (r + n) % rows : r + n) = in(r, n);
    }
    const CMatrix v = d * u;
    for (int np = 0; np <= c; ++np) {
      for (int b = 0; b < blocks; ++b) {
        const int r = ring ? ((b - np) % rows + rows) % rows : b - np;
        if (r >= 0 && r < rows) out(r, np) = v(np, b);
      }
    }
    joint.amplitudes = std::move(out);
    return;
  }

  std::vector<char> occupied(c + 1);
  for (int n = 0; n <= c; ++n) occupied[n] = cols_of(in, mc, n).squaredNorm() > 0.0;
  // Photon number n -> n' moves the electron from ladder row r' + (n' - n)
  // to row r'.
  for (int np = 0; np <= c; ++np) {
    ColMap dst = cols_of(out, mc, np);
    for (int n = 0; n <= c; ++n) {
      const cplx coef = d(np, n);
      // Far off the band D(g) is below rounding of a unit-norm state.
      if (!occupied[n] || std::abs(coef) < kNegligibleElement) continue;
      ConstColMap src = cols_of(in, mc, n);
      for (const auto& run : row_runs(rows, np - n, ring)) {
        dst.middleRows(run[0], run[2]) += coef * src.middleRows(run[1], run[2]);
      }
    }
  }
  joint.amplitudes = std::move(out);
}

int minimum_theta_samples(const JointState& joint) {
  if (joint.boundary == Boundary::kPeriodic) return joint.rows();
  // Frequencies e - e' - (m - n) stay below rows + cutoff in magnitude.
  return joint.rows() + joint.cutoff + 1;
}

namespace {

/// Shared angle-basis driver; `apply` maps a photon vector at angle theta.
template <typename Apply>
int fourier_pass(JointState& joint, int theta_samples, Apply&& apply) {
  grow_open(joint, joint.cutoff);
  int M = theta_samples;
  if (joint.boundary == Boundary::kPeriodic) {
    M = joint.rows();
  } else {
    M = std::max(M, minimum_theta_samples(joint));
  }
  const CMatrix& in = joint.amplitudes;
  CMatrix out = CMatrix::Zero(in.rows(), in.cols());
  for (int s = 0; s < M; ++s) {
    const double theta = 2.0 * kPi * s / M;
    const CVector w = row_twiddles(joint, s, M);
    CVector psi = in.transpose() * w;
    psi = apply(theta, psi);
    out.noalias() += w.conjugate() * psi.transpose();
  }
  joint.amplitudes = out / static_cast<double>(M);
  return M;
}

}  // namespace

int scatter_fourier(JointState& joint, cplx g, int theta_samples, int mode) {
  if (g == 0.0) return 0;
  const int c = joint.cutoff;
  const int d = c + 1;
  const CMatrix real_d = make_displacement(std::abs(g), c).entries;
  const double phase = std::arg(g);
  const int modes = joint.modes;
  if (mode < 0 || mode >= modes) throw Error("photon mode index out of range");
  return fourier_pass(joint, theta_samples, [&](double theta, const CVector& v) -> CVector {
    if (modes == 1) return rotated_apply(real_d, phase - theta, v);
    const CMatrix u = rotated_matrix(real_d, phase - theta);
    Eigen::Map<const CMatrix> x(v.data(), d, d);  // x(n1, n0)
    CMatrix y = (mode == 0) ? CMatrix(x * u.transpose()) : CMatrix(u * x);
    return Eigen::Map<CVector>(y.data(), d * d);
  });
}

int scatter_fourier_two_mode(JointState& joint, cplx g1, cplx g2, int theta_samples) {
  if (joint.modes != 2) throw Error("two-mode scattering needs a two-mode joint state");
  const int c = joint.cutoff;
  const int d = c + 1;
  const CMatrix d1 = make_displacement(std::abs(g1), c).entries;
  const CMatrix d2 = make_displacement(std::abs(g2), c).entries;
  return fourier_pass(joint, theta_samples, [&](double theta, const CVector& v) -> CVector {
    const CMatrix u0 = rotated_matrix(d1, std::arg(g1) - theta);
    const CMatrix u1 = rotated_matrix(d2, std::arg(g2) - theta);
    Eigen::Map<const CMatrix> x(v.data(), d, d);
    CMatrix y = u1 * x * u0.transpose();
    return Eigen::Map<CVector>(y.data(), d * d);
  });
}

JointState joint_scatter_ladder(const ElectronComb& comb, const PhotonState& photon, cplx g) {
  JointState j = make_joint(comb, photon);
  scatter_ladder(j, g);
  return j;
}

JointState joint_scatter_fourier(const ElectronComb& comb, const PhotonState& photon, cplx g,
                                 int theta_samples) {
  JointState j = make_joint(comb, photon);
  const int requested = std::max(theta_samples, 8 * comb.size());
  scatter_fourier(j, g, requested);
  return j;
}

JointState two_mode_scatter(const ElectronComb& comb, const PhotonState& ph1,
                            const PhotonState& ph2, cplx g1, cplx g2) {
  JointState j = make_joint(comb, ph1, ph2);
  scatter_ladder(j, g1, 0);
  scatter_ladder(j, g2, 1);
  return j;
}

PostSelection PostSelection::residue(int k, int modulus) {
  if (modulus < 1) throw Error("residue modulus must be >= 1");
  return {Rule::kResidue, positive_mod(k, modulus), modulus};
}

PostSelection PostSelection::exact(int n) { return {Rule::kExact, n, 0}; }

PostSelection PostSelection::parity(bool odd) { return {Rule::kParity, odd ? 1 : 0, 2}; }

bool PostSelection::selects(int ladder_index) const {
  switch (rule) {
    case Rule::kExact:
      return ladder_index == k;
    case Rule::kResidue:
    case Rule::kParity:
      return positive_mod(ladder_index, modulus) == k;
  }
  return false;
}

PhotonState Heralded::photon_state() const {
  if (modes != 1) throw Error("heralded state has more than one photon mode");
  return PhotonState(state);
}

std::vector<std::pair<double, CVector>> Heralded::ensemble(double drop_below) const {
  std::vector<std::pair<double, CVector>> members;
  for (const auto& b : branches) members.emplace_back(b.probability, b.photon);
  return compress_ensemble(members, drop_below);
}

Heralded postselect(const JointState& joint, const PostSelection& rule) {
  Heralded h;
  h.modes = joint.modes;
  h.cutoff = joint.cutoff;
  const bool ring = joint.boundary == Boundary::kPeriodic;
  if (ring && rule.rule != PostSelection::Rule::kExact && joint.rows() % rule.modulus != 0) {
    throw Error("ring size is not a multiple of the post-selection modulus");
  }
  for (int r = 0; r < joint.rows(); ++r) {
    const int e = joint.first_index + r;
    bool keep = rule.selects(e);
    if (ring && rule.rule == PostSelection::Rule::kExact) {
      keep = positive_mod(rule.k, joint.rows()) == r;
    }
    if (!keep) continue;
    const double p = joint.amplitudes.row(r).squaredNorm();
    if (p <= 0.0) continue;
    h.branches.push_back({e, p, joint.amplitudes.row(r).transpose() / std::sqrt(p)});
    h.probability += p;
  }
  if (h.probability < kZeroProbability) {
    throw ZeroProbabilityError("post-selection branch has zero probability");
  }
  const auto ens = h.ensemble();
  h.state = ens.front().second;
  h.principal_weight = ens.front().first;
  return h;
}

std::vector<std::pair<double, CVector>> compress_ensemble(
    const std::vector<std::pair<double, CVector>>& members, double drop_below, int max_members) {
  if (members.empty()) throw ZeroNormError("empty ensemble");
  if (members.size() == 1) return {{1.0, members.front().second.normalized()}};
  const Eigen::Index dim = members.front().second.size();
  const Eigen::Index k = static_cast<Eigen::Index>(members.size());
  CMatrix a(dim, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CVector& v = members[i].second;
    a.col(i) = std::sqrt(std::max(0.0, members[i].first)) * v / v.norm();
  }
  std::vector<std::pair<double, CVector>> out;
  double trace = 0.0;
  if (k <= dim) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.adjoint() * a);
    trace = es.eigenvalues().sum();
    for (Eigen::Index i = k - 1; i >= 0; --i) {
      const double lambda = es.eigenvalues()[i];
      if (!(lambda > drop_below * trace)) break;
      CVector v = a * es.eigenvectors().col(i);
      out.emplace_back(lambda, v / v.norm());
    }
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a * a.adjoint());
    trace = es.eigenvalues().sum();
    for (Eigen::Index i = dim - 1; i >= 0; --i) {
      const double lambda = es.eigenvalues()[i];
      if (!(lambda > drop_below * trace)) break;
      out.emplace_back(lambda, es.eigenvectors().col(i));
    }
  }
  if (out.empty() || !(trace > 0.0)) throw ZeroNormError("ensemble has no weight");
  if (static_cast<int>(out.size()) > max_members) out.resize(max_members);
  double kept = 0.0;
  for (const auto& m : out) kept += m.first;
  for (auto& m : out) m.first /= kept;
  return out;
}

OperatorMatrix conditional_kraus(cplx g, int N, int k, int cutoff) {
  if (N < 1 || k < 0 || k >= N) throw Error("cat order k must satisfy 0 <= k < N");
  const CMatrix real_d = make_displacement(std::abs(g), cutoff).entries;
  CMatrix kraus = CMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int m = 0; m < N; ++m) {
    const cplx w = std::polar(1.0 / N, -2.0 * kPi * k * m / N);
    kraus += w * rotate_displacement(real_d, std::arg(g) + 2.0 * kPi * m / N);
  }
  return OperatorMatrix{std::move(kraus), "K"};
}

PhotonState apply_kraus(const OperatorMatrix& kraus, const PhotonState& state) {
  return kraus.apply(state);
}

CVector apply_cat_kraus(const CMatrix& real_displacement, cplx g, int N, int k, const CVector& v) {
  CVector out = CVector::Zero(v.size());
  for (int m = 0; m < N; ++m) {
    const cplx w = std::polar(1.0 / N, -2.0 * kPi * k * m / N);
    out += w * rotated_apply(real_displacement, std::arg(g) + 2.0 * kPi * m / N, v);
  }
  return out;
}

CVector apply_two_mode_kraus(cplx g1, cplx g2, int N, int k, int cutoff, const CVector& v) {
  const int d = cutoff + 1;
  if (v.size() != d * d) throw Error("two-mode vector has the wrong dimension");
  const CMatrix d1 = make_displacement(std::abs(g1), cutoff).entries;
  const CMatrix d2 = make_displacement(std::abs(g2), cutoff).entries;
  Eigen::Map<const CMatrix> x(v.data(), d, d);  // x(n1, n0)
  CMatrix acc = CMatrix::Zero(d, d);
  for (int m = 0; m < N; ++m) {
    const double turn = 2.0 * kPi * m / N;
    const cplx w = std::polar(1.0 / N, -turn * k);
    acc += w * rotate_displacement(d2, std::arg(g2) + turn) * x *
           rotate_displacement(d1, std::arg(g1) + turn).transpose();
  }
  return Eigen::Map<CVector>(acc.data(), d * d);
}

double cat_probability(cplx g, int N, int k) {
  if (N < 1 || k < 0 || k >= N) throw Error("cat order k must satisfy 0 <= k < N");
  const double a2 = std::norm(g);
  cplx total = 0.0;
  for (int m = 0; m < N; ++m) {
    for (int mp = 0; mp < N; ++mp) {
      const cplx wm = std::polar(1.0, -2.0 * kPi * k * m / N);
      const cplx wmp = std::polar(1.0, -2.0 * kPi * k * mp / N);
      const cplx bm = g * std::polar(1.0, 2.0 * kPi * m / N);
      const cplx bmp = g * std::polar(1.0, 2.0 * kPi * mp / N);
      // <b_m|b_mp> = exp(-|g|^2 + b_m^* b_mp)
      total += std::conj(wm) * wmp * std::exp(-a2 + std::conj(bm) * bmp);
    }
  }
  return total.real() / (static_cast<double>(N) * N);
}

int cat_order_for_residue(int comb_shift, int residue, int N) {
  return positive_mod(static_cast<long>(comb_shift) - residue, N);
}

int residue_for_cat_order(int comb_shift, int k, int N) {
  return positive_mod(static_cast<long>(comb_shift) - k, N);
}

}  // namespace gkpforge
