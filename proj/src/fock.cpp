#include "gkpforge/fock.hpp"

#include <algorithm>
#include <cmath>

namespace gkpforge {

namespace {

constexpr double kRescaleBig = 1e150;
const double kLogRescaleBig = std::log(kRescaleBig);

void require_cutoff(int cutoff) {
  if (cutoff < 1) throw Error("Fock cutoff must be >= 1");
}

double leak_of(const CVector& amps) {
  return std::max(0.0, 1.0 - amps.squaredNorm());
}

/// f_n^(k)(x) = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^(k)(x) for n = 0..count-1.
/// These are the magnitudes of <n+k|D(alpha)|n> with x = |alpha|^2.
void laguerre_functions(int k, double x, int count, double* out) {
  if (count <= 0) return;
  if (x == 0.0) {
    for (int n = 0; n < count; ++n) out[n] = (k == 0) ? 1.0 : 0.0;
    return;
  }
  // Work with a mantissa and a shared log scale to survive large k.
  double log_scale =
      0.5 * k * std::log(x) - 0.5 * x - 0.5 * std::lgamma(k + 1.0);
  std::vector<double> mant(count);
  std::vector<double> scale(count);
  double prev = 0.0;
  double cur = 1.0;
  mant[0] = cur;
  scale[0] = log_scale;
  for (int n = 0; n + 1 < count; ++n) {
    const double a = (2.0 * n + 1.0 + k - x);
    const double b = std::sqrt(static_cast<double>(n) * (n + k));
    const double denom = std::sqrt((n + 1.0) * (n + 1.0 + k));
    double next = (a * cur - b * prev) / denom;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleBig) {
      cur /= kRescaleBig;
      prev /= kRescaleBig;
      log_scale += kLogRescaleBig;
    }
    mant[n + 1] = cur;
    scale[n + 1] = log_scale;
  }
  double last_scale = scale[0];
  double factor = std::exp(last_scale);
  for (int n = 0; n < count; ++n) {
    if (scale[n] != last_scale) {
      last_scale = scale[n];
      factor = std::exp(last_scale);
    }
    out[n] = mant[n] * factor;
  }
}

}  // namespace

PhotonState PhotonState::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ZeroNormError("state has zero norm");
  return PhotonState(amplitudes / n, norm_leak);
}

PhotonState PhotonState::resized(int new_cutoff) const {
  require_cutoff(new_cutoff);
  CVector out = CVector::Zero(new_cutoff + 1);
  const int keep = std::min<int>(new_cutoff + 1, amplitudes.size());
  out.head(keep) = amplitudes.head(keep);
  double leak = norm_leak;
  if (keep < amplitudes.size()) {
    leak += amplitudes.tail(amplitudes.size() - keep).squaredNorm();
  }
  return PhotonState(std::move(out), leak);
}

double PhotonState::mean_photon_number() const {
  double total = 0.0;
  for (int n = 0; n < amplitudes.size(); ++n) total += n * std::norm(amplitudes[n]);
  return total / amplitudes.squaredNorm();
}

PhotonState OperatorMatrix::apply(const PhotonState& s) const {
  if (s.amplitudes.size() != entries.cols()) {
    return PhotonState(entries * s.resized(dim() - 1).amplitudes, s.norm_leak);
  }
  return PhotonState(entries * s.amplitudes, s.norm_leak);
}

double WignerGrid::integral() const {
  if (x.size() < 2 || p.size() < 2) return 0.0;
  const double dx = x[1] - x[0];
  const double dp = p[1] - p[0];
  return values.sum() * dx * dp;
}

std::vector<double> GridSpec::x_axis() const {
  std::vector<double> out(nx);
  for (int i = 0; i < nx; ++i) out[i] = x_min + i * dx();
  return out;
}

std::vector<double> GridSpec::p_axis() const {
  std::vector<double> out(np);
  for (int i = 0; i < np; ++i) out[i] = p_min + i * dp();
  return out;
}

PhotonState vacuum(int cutoff) { return fock_state(0, cutoff); }

PhotonState fock_state(int n, int cutoff) {
  require_cutoff(cutoff);
  if (n < 0 || n > cutoff) throw Error("Fock index outside the truncated basis");
  CVector v = CVector::Zero(cutoff + 1);
  v[n] = 1.0;
  return PhotonState(std::move(v));
}

PhotonState make_coherent(cplx alpha, int cutoff) {
  require_cutoff(cutoff);
  CVector v = CVector::Zero(cutoff + 1);
  const double mag = std::abs(alpha);
  if (mag == 0.0) {
    v[0] = 1.0;
    return PhotonState(std::move(v));
  }
  const double phase = std::arg(alpha);
  const double log_mag = std::log(mag);
  for (int n = 0; n <= cutoff; ++n) {
    const double lg = -0.5 * mag * mag + n * log_mag - 0.5 * std::lgamma(n + 1.0);
    v[n] = std::polar(std::exp(lg), n * phase);
  }
  const double leak = leak_of(v);
  return PhotonState(std::move(v), leak);
}

PhotonState make_squeezed_vacuum(const SqueezeParams& params, int cutoff) {
  require_cutoff(cutoff);
  CVector v = CVector::Zero(cutoff + 1);
  if (params.r == 0.0) {
    v[0] = 1.0;
    return PhotonState(std::move(v));
  }
  const double t = std::tanh(std::abs(params.r));
  // Negative r is folded into the phase: S(-r, theta) = S(r, theta + pi).
  const double theta = params.r < 0 ? params.theta + kPi : params.theta;
  const double base = -0.5 * std::log(std::cosh(params.r));
  for (int n = 0; 2 * n <= cutoff; ++n) {
    const double lg = base + n * std::log(t) + 0.5 * std::lgamma(2.0 * n + 1.0) -
                      n * std::log(2.0) - std::lgamma(n + 1.0);
    // (-e^{i theta} tanh r)^n
    v[2 * n] = std::polar(std::exp(lg), n * (theta + kPi));
  }
  const double leak = leak_of(v);
  return PhotonState(std::move(v), leak);
}

int safe_cutoff(int max_n, double abs_alpha) {
  return coherent_cutoff(std::sqrt(static_cast<double>(max_n)) + abs_alpha);
}

int coherent_cutoff(double abs_alpha) {
  const double a2 = abs_alpha * abs_alpha;
  return static_cast<int>(std::ceil(a2 + 6.0 * abs_alpha + 10.0));
}

CMatrix annihilation(int cutoff) {
  require_cutoff(cutoff);
  CMatrix a = CMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMatrix creation(int cutoff) { return annihilation(cutoff).adjoint(); }

CMatrix number_operator(int cutoff) {
  require_cutoff(cutoff);
  CMatrix n = CMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int k = 0; k <= cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

CMatrix expm(const CMatrix& generator) {
  const Eigen::Index dim = generator.rows();
  if (dim != generator.cols()) throw Error("expm needs a square matrix");
  const double norm1 = generator.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const CMatrix scaled = generator / std::ldexp(1.0, squarings);

  CMatrix result = CMatrix::Identity(dim, dim);
  CMatrix term = CMatrix::Identity(dim, dim);
  for (int k = 1; k <= 40; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().colwise().sum().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

OperatorMatrix make_displacement(cplx alpha, int cutoff) {
  require_cutoff(cutoff);
  const int dim = cutoff + 1;
  const double x = std::norm(alpha);
  const double phase = std::arg(alpha);
  CMatrix d = CMatrix::Zero(dim, dim);
  std::vector<double> f(dim);
  for (int k = 0; k < dim; ++k) {
    const int count = dim - k;
    laguerre_functions(k, x, count, f.data());
    const cplx up = std::polar(1.0, k * phase);
    const cplx down = (k % 2 == 0 ? 1.0 : -1.0) * std::polar(1.0, -k * phase);
    for (int n = 0; n < count; ++n) {
      d(n + k, n) = up * f[n];
      if (k > 0) d(n, n + k) = down * f[n];
    }
  }
  return OperatorMatrix{std::move(d), "D"};
}

OperatorMatrix make_displacement_expm(cplx alpha, int cutoff) {
  const CMatrix a = annihilation(cutoff);
  const CMatrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return OperatorMatrix{expm(gen), "D_expm"};
}

OperatorMatrix make_squeeze(const SqueezeParams& params, int cutoff) {
  const CMatrix a = annihilation(cutoff);
  const CMatrix a2 = a * a;
  const cplx xi = params.xi();
  const CMatrix gen = 0.5 * std::conj(xi) * a2 - 0.5 * xi * a2.adjoint();
  return OperatorMatrix{expm(gen), "S"};
}

CVector rotation_phases(double phi, int cutoff) {
  CVector r(cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) r[n] = std::polar(1.0, n * phi);
  return r;
}

CMatrix rotate_displacement(const CMatrix& real_displacement, double phase) {
  // R(phi) D(|a|) R(-phi) = D(|a| e^{i phi}); element (m, n) picks up e^{i(m-n)phi}.
  const Eigen::Index dim = real_displacement.rows();
  const CVector r = rotation_phases(phase, static_cast<int>(dim) - 1);
  return r.asDiagonal() * real_displacement * r.conjugate().asDiagonal();
}

CVector parity_applied(const CVector& amplitudes) {
  CVector out = amplitudes;
  for (Eigen::Index n = 1; n < out.size(); n += 2) out[n] = -out[n];
  return out;
}

cplx overlap(const PhotonState& a, const PhotonState& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw ZeroNormError("fidelity of a zero-norm state");
  const Eigen::Index common = std::min(a.amplitudes.size(), b.amplitudes.size());
  const cplx dot = a.amplitudes.head(common).dot(b.amplitudes.head(common));
  return dot / (na * nb);
}

double fidelity(const PhotonState& a, const PhotonState& b) {
  return std::min(1.0, std::norm(overlap(a, b)));
}

std::vector<double> hermite_functions(int cutoff, double x) {
  std::vector<double> h(cutoff + 1);
  std::vector<double> log_scale(cutoff + 1);
  double scale = -0.5 * x * x;
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25);
  h[0] = cur;
  log_scale[0] = scale;
  for (int n = 1; n <= cutoff; ++n) {
    const double next =
        std::sqrt(2.0 / n) * x * cur - std::sqrt((n - 1.0) / n) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleBig) {
      cur /= kRescaleBig;
      prev /= kRescaleBig;
      scale += kLogRescaleBig;
    }
    h[n] = cur;
    log_scale[n] = scale;
  }
  for (int n = 0; n <= cutoff; ++n) h[n] = (h[n] == 0.0) ? 0.0 : h[n] * std::exp(log_scale[n]);
  return h;
}

std::vector<cplx> quadrature_wavefunction(const PhotonState& state, double angle,
                                          std::span<const double> grid) {
  const int cutoff = state.cutoff();
  const CVector rotated =
      state.amplitudes.cwiseProduct(rotation_phases(-angle, cutoff));
  std::vector<cplx> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto h = hermite_functions(cutoff, grid[i]);
    cplx acc = 0.0;
    for (int n = 0; n <= cutoff; ++n) acc += rotated[n] * h[n];
    out[i] = acc;
  }
  return out;
}

double wigner_at(const PhotonState& state, double x, double p) {
  const PhotonState s = state.normalized();
  // D(beta) Pi D(-beta) = D(2 beta) Pi, so only elements inside the state's
  // support are needed and the truncation never clips the displaced state.
  const cplx two_beta(std::sqrt(2.0) * x, std::sqrt(2.0) * p);
  const CMatrix d = make_displacement(two_beta, s.cutoff()).entries;
  const cplx value = s.amplitudes.dot(d * parity_applied(s.amplitudes));
  return value.real() / kPi;
}

WignerGrid wigner(const PhotonState& state, const GridSpec& grid) {
  WignerGrid out;
  out.x = grid.x_axis();
  out.p = grid.p_axis();
  out.values.resize(grid.np, grid.nx);
  const PhotonState s = state.normalized();
  const CVector parity = parity_applied(s.amplitudes);
  for (int i = 0; i < grid.np; ++i) {
    for (int j = 0; j < grid.nx; ++j) {
      const cplx two_beta(std::sqrt(2.0) * out.x[j], std::sqrt(2.0) * out.p[i]);
      const CMatrix d = make_displacement(two_beta, s.cutoff()).entries;
      out.values(i, j) = s.amplitudes.dot(d * parity).real() / kPi;
    }
  }
  return out;
}

double quadrature_mean(const PhotonState& state, double angle) {
  const PhotonState s = state.normalized();
  const CVector& c = s.amplitudes;
  cplx mean_a = 0.0;
  for (Eigen::Index n = 1; n < c.size(); ++n) {
    mean_a += std::conj(c[n - 1]) * std::sqrt(static_cast<double>(n)) * c[n];
  }
  return std::sqrt(2.0) * std::real(std::polar(1.0, -angle) * mean_a);
}

double quadrature_variance(const PhotonState& state, double angle) {
  const PhotonState s = state.normalized();
  const CVector& c = s.amplitudes;
  cplx mean_a2 = 0.0;
  double mean_n = 0.0;
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    mean_n += n * std::norm(c[n]);
    if (n >= 2) {
      mean_a2 += std::conj(c[n - 2]) * std::sqrt(static_cast<double>(n) * (n - 1)) * c[n];
    }
  }
  const double second =
      0.5 * (2.0 * std::real(std::polar(1.0, -2.0 * angle) * mean_a2) + 2.0 * mean_n + 1.0);
  const double mean = quadrature_mean(s, angle);
  return second - mean * mean;
}

}  // namespace gkpforge
