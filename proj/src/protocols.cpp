#include "gkpforge/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gkpforge/metrics.hpp"

namespace gkpforge {

namespace {

const double kSqrtPiOver2 = std::sqrt(kPi / 2.0);
const double kSqrtPiOver8 = std::sqrt(kPi / 8.0);
// Hexagonal lattice step: sqrt(pi / sqrt 3).
const double kHexStep = std::sqrt(kPi / std::sqrt(3.0));

int positive_mod(long a, long m) { return static_cast<int>(((a % m) + m) % m); }

InteractionStep even_step(cplx g, int spacing = 2) {
  InteractionStep s;
  s.g = g;
  s.comb.spacing = spacing;
  s.post = PostSelection::residue(0, spacing);
  return s;
}

InteractionStep odd_step(cplx g) {
  InteractionStep s = even_step(g);
  s.post = PostSelection::residue(1, 2);
  return s;
}

void append(std::vector<InteractionStep>& steps, int count, const InteractionStep& s) {
  for (int i = 0; i < count; ++i) steps.push_back(s);
}

/// Cat order of an ideal-comb step for the analytic engine.
int step_cat_order(const InteractionStep& s) {
  const int N = s.comb.spacing;
  int residue = 0;
  switch (s.post.rule) {
    case PostSelection::Rule::kExact:
      residue = positive_mod(s.post.k, N);
      break;
    case PostSelection::Rule::kResidue:
    case PostSelection::Rule::kParity:
      if (s.post.modulus != N) {
        throw ConfigError("analytic engine needs the post-selection modulus to equal the comb spacing");
      }
      residue = s.post.k;
      break;
  }
  return cat_order_for_residue(s.comb.shift, residue, N);
}

/// K v with the worst norm loss of any truncated displacement it used.
std::pair<CVector, double> kraus_with_leak(const CMatrix& real_d, cplx g, int N, int k,
                                           const CVector& v) {
  CVector out = CVector::Zero(v.size());
  const double n2 = v.squaredNorm();
  double leak = 0.0;
  const int c = static_cast<int>(v.size()) - 1;
  for (int m = 0; m < N; ++m) {
    const double phi = std::arg(g) + 2.0 * kPi * m / N;
    const CVector r = rotation_phases(phi, c);
    const CVector moved = r.cwiseProduct(real_d * r.conjugate().cwiseProduct(v));
    leak = std::max(leak, 1.0 - moved.squaredNorm() / n2);
    out += std::polar(1.0 / N, -2.0 * kPi * k * m / N) * moved;
  }
  return {out, leak};
}

std::pair<CVector, double> two_mode_kraus_with_leak(const CMatrix& d1, const CMatrix& d2, cplx g1,
                                                    cplx g2, int N, int k, const CVector& v) {
  const int d = static_cast<int>(d1.rows());
  Eigen::Map<const CMatrix> x(v.data(), d, d);
  CMatrix acc = CMatrix::Zero(d, d);
  const double n2 = v.squaredNorm();
  double leak = 0.0;
  for (int m = 0; m < N; ++m) {
    const double turn = 2.0 * kPi * m / N;
    const CMatrix y = rotate_displacement(d2, std::arg(g2) + turn) * x *
                      rotate_displacement(d1, std::arg(g1) + turn).transpose();
    leak = std::max(leak, 1.0 - y.squaredNorm() / n2);
    acc += std::polar(1.0 / N, -turn * k) * y;
  }
  return {Eigen::Map<CVector>(acc.data(), d * d), leak};
}

CVector two_mode_product(const CVector& a, const CVector& b) {
  const Eigen::Index d = a.size();
  CVector out(d * d);
  for (Eigen::Index n0 = 0; n0 < d; ++n0) out.segment(n0 * d, d) = a[n0] * b;
  return out;
}

void validate(const Protocol& p) {
  if (p.modes != 1 && p.modes != 2) throw ConfigError("modes must be 1 or 2");
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const auto& s = p.steps[i];
    if (std::abs(s.g) > p.g_max || std::abs(s.g2) > p.g_max) {
      throw ConfigError("step " + std::to_string(i) + ": |g| exceeds g_max");
    }
    if (s.comb.spacing < 1) throw ConfigError("step " + std::to_string(i) + ": comb spacing < 1");
    if (!s.comb.ideal() && !(s.comb.sigma > 0.0)) {
      throw ConfigError("step " + std::to_string(i) + ": Gaussian comb needs sigma > 0");
    }
    if (p.engine == Engine::kAnalytic && !s.comb.ideal()) {
      throw ConfigError("analytic engine accepts ideal combs only");
    }
    if (s.comb.ideal() && s.comb.dispersion_z != 0.0) {
      throw ConfigError("dispersion phases need a finite (Gaussian) comb");
    }
    if (p.modes == 1 && s.g2 != 0.0) throw ConfigError("g2 set on a single-mode protocol");
  }
}

}  // namespace

ElectronComb CombSpec::build() const {
  if (ideal()) return ideal_comb(spacing, shift, window > 0 ? window : std::max(1, 2 * spacing));
  const int w = window > 0 ? window : std::max(spacing, static_cast<int>(std::ceil(7.0 * sigma)));
  ElectronComb comb = gaussian_comb(spacing, sigma, w, shift);
  if (dispersion_z != 0.0) {
    comb = apply_phase_profile(
        comb, quadratic_profile(dispersion_beta, dispersion_z, comb.first_index(), comb.size()));
  }
  return comb;
}

PhotonState Outcome::state() const {
  if (modes != 1) throw Error("outcome has two photon modes");
  return PhotonState(vector);
}

double Outcome::purity() const {
  double p = 0.0;
  for (const auto& [w, v] : ensemble) p += w * w;
  return p;
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::kAnalytic: return "analytic";
    case Engine::kLadder: return "ladder";
    case Engine::kFourier: return "fourier";
  }
  return "analytic";
}

int auto_cutoff(const Protocol& p) {
  double sum = 0.0;
  for (const auto& s : p.steps) sum += std::max(std::abs(s.g), std::abs(s.g2));
  int extra = 0;
  if (p.initial.kind == InitialKind::kSqueezed) {
    extra = static_cast<int>(std::ceil(10.0 * std::exp(2.0 * std::abs(p.initial.squeeze.r))));
  } else if (p.initial.kind == InitialKind::kSquareGkp) {
    const double d = p.initial.delta;
    sum += 2.5 / d;
    extra = static_cast<int>(std::ceil(10.0 / (d * d)));
  }
  const double a = sum * sum;
  return static_cast<int>(std::ceil(a + 6.0 * std::sqrt(a) + 10.0)) + extra;
}

int resolve_cutoff(const Protocol& p) {
  if (p.cutoff_policy.automatic) return auto_cutoff(p);
  if (p.cutoff_policy.cutoff < 1) throw ConfigError("fixed cutoff must be >= 1");
  return p.cutoff_policy.cutoff;
}

PhotonState initial_photon_state(const InitialState& init, int cutoff) {
  switch (init.kind) {
    case InitialKind::kVacuum:
      return vacuum(cutoff);
    case InitialKind::kSqueezed:
      return make_squeezed_vacuum(init.squeeze, cutoff);
    case InitialKind::kSquareGkp:
      return square_gkp(init.logical, init.delta, cutoff);
  }
  return vacuum(cutoff);
}

Outcome run_protocol(const Protocol& p) {
  validate(p);
  Outcome out;
  out.modes = p.modes;
  out.cutoff = resolve_cutoff(p);
  const int c = out.cutoff;

  const PhotonState seed = initial_photon_state(p.initial, c);
  out.max_norm_leak = seed.norm_leak;
  if (seed.norm_leak > p.leak_tolerance) {
    std::ostringstream msg;
    msg << "initial state leaks " << seed.norm_leak << " at cutoff " << c;
    throw UnconvergedError(msg.str());
  }
  const CVector s = seed.amplitudes / seed.norm();
  std::vector<std::pair<double, CVector>> ensemble{
      {1.0, p.modes == 1 ? s : two_mode_product(s, s)}};

  std::map<double, CMatrix> displacement_cache;
  auto real_d = [&](double mag) -> const CMatrix& {
    auto it = displacement_cache.find(mag);
    if (it == displacement_cache.end()) {
      it = displacement_cache.emplace(mag, make_displacement(mag, c).entries).first;
    }
    return it->second;
  };

  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const InteractionStep& step = p.steps[i];
    std::vector<std::pair<double, CVector>> next;
    double step_probability = 0.0;
    double step_leak = 0.0;

    if (p.engine == Engine::kAnalytic) {
      const int N = step.comb.spacing;
      const int k = step_cat_order(step);
      for (const auto& [w, v] : ensemble) {
        auto [kv, leak] =
            p.modes == 1
                ? kraus_with_leak(real_d(std::abs(step.g)), step.g, N, k, v)
                : two_mode_kraus_with_leak(real_d(std::abs(step.g)), real_d(std::abs(step.g2)),
                                           step.g, step.g2, N, k, v);
        step_leak += w * leak;
        const double pk = kv.squaredNorm();
        step_probability += w * pk;
        if (pk > 0.0) next.emplace_back(w * pk, kv / std::sqrt(pk));
      }
    } else {
      const ElectronComb comb = step.comb.build();
      const Boundary boundary = step.comb.ideal() ? Boundary::kPeriodic : Boundary::kOpen;
      if (!step.comb.ideal() && !comb.window_converged) {
        out.diagnostics.push_back("step " + std::to_string(i) + ": comb window truncates " +
                                  std::to_string(comb.truncated_weight));
      }
      for (const auto& [w, v] : ensemble) {
        JointState j;
        if (p.modes == 1) {
          j = make_joint(comb, PhotonState(v), boundary);
        } else {
          // Electron tensor a two-mode photon vector.
          j = make_joint(comb, vacuum(c), vacuum(c), boundary);
          const CVector e = j.amplitudes.col(0);
          j.amplitudes = e * v.transpose();
        }
        const int requested = std::max(p.theta_samples, 8 * comb.size());
        if (p.engine == Engine::kLadder) {
          scatter_ladder(j, step.g, 0);
          if (p.modes == 2) scatter_ladder(j, step.g2, 1);
        } else if (p.modes == 1) {
          out.theta_samples_used = std::max(out.theta_samples_used, scatter_fourier(j, step.g, requested));
        } else {
          out.theta_samples_used =
              std::max(out.theta_samples_used, scatter_fourier_two_mode(j, step.g, step.g2, requested));
        }
        out.max_ladder_rows = std::max(out.max_ladder_rows, j.rows());
        // Weighted by the member's share: near-zero eigen-components of a
        // mixture carry rounding noise that is not a truncation signal.
        step_leak += w * j.photon_edge_population() / j.amplitudes.squaredNorm();
        Heralded h;
        try {
          h = postselect(j, step.post);
        } catch (const ZeroProbabilityError&) {
          continue;
        }
        step_probability += w * h.probability;
        for (const auto& b : h.branches) next.emplace_back(w * b.probability, b.photon);
      }
    }

    out.max_norm_leak = std::max(out.max_norm_leak, step_leak);
    if (step_leak > p.leak_tolerance) {
      std::ostringstream msg;
      msg << "step " << i << " leaks " << step_leak << " at cutoff " << c;
      throw UnconvergedError(msg.str());
    }
    // Exact cancellations leave rounding noise far above kZeroProbability.
    if (!(step_probability > 1e-20) || next.empty()) {
      throw ZeroProbabilityError("step " + std::to_string(i) + " post-selects a zero-probability branch");
    }
    out.step_probabilities.push_back(step_probability);
    out.probability *= step_probability;
    ensemble = compress_ensemble(next, p.ensemble_drop);
  }

  out.ensemble = ensemble;
  out.vector = ensemble.front().second;
  return out;
}

// Presets ----------------------------------------------------------------------

int table1_electron_count(int row, int m) {
  switch (row) {
    case 1: return 4 * m;
    case 2: return 5 * m;
    case 3: return 2 * m;
    case 4: return 8 * m;
    case 5: return m;
    case 6: return 4 * m;
    case 7: return 3 * m;
    case 8: return m;
  }
  throw ConfigError("preset row must be 1..8");
}

Protocol table1_preset(int row, int m) {
  if (m < 1) throw ConfigError("preset size must be >= 1");
  Protocol p;
  p.name = "table1-row" + std::to_string(row);
  const cplx i(0.0, 1.0);
  const cplx w = std::polar(1.0, 2.0 * kPi / 3.0);
  auto& st = p.steps;
  switch (row) {
    case 1:
      append(st, 2 * m, even_step(0.5 * kSqrtPiOver2));
      append(st, 2 * m, even_step(0.5 * kSqrtPiOver2 * i));
      p.target = "square:0";
      break;
    case 2:
      append(st, 4 * m, even_step(kSqrtPiOver8 * i));
      append(st, m, even_step(kSqrtPiOver2));
      p.target = m % 2 == 0 ? "square:0" : "square:1";
      break;
    case 3:
      append(st, m, even_step(kSqrtPiOver2 * i));
      append(st, m, even_step(kSqrtPiOver2));
      p.target = "square:H";
      break;
    case 4:
      append(st, 4 * m, even_step(0.25 * kSqrtPiOver2 * i));
      append(st, 2 * m, even_step(0.25 * kSqrtPiOver2));
      append(st, 2 * m, odd_step(0.25 * kSqrtPiOver2));
      p.target = "square:-";
      break;
    case 5:
      p.initial.kind = InitialKind::kSqueezed;
      p.initial.squeeze = {1.1513, 0.0};
      append(st, m, even_step(kSqrtPiOver2));
      p.target = m % 2 == 0 ? "square:0" : "square:1";
      break;
    case 6:
      append(st, 2 * m, even_step(0.5 * kHexStep * w));
      append(st, 2 * m, even_step(0.5 * kHexStep));
      p.target = "hex:0";
      break;
    case 7:
      append(st, m, even_step(kHexStep));
      append(st, m, even_step(kHexStep * w));
      append(st, m, even_step(kHexStep * w * w));
      p.target = "hex:T";
      break;
    case 8:
      p.initial.kind = InitialKind::kSqueezed;
      p.initial.squeeze = {1.64, kPi / 6.0};
      append(st, m, even_step(kHexStep));
      p.target = "hex:0";
      break;
    default:
      throw ConfigError("preset row must be 1..8");
  }
  p.preset_row = row;
  p.preset_size = m;
  return p;
}

Protocol cat_preset(int N, cplx g, int k) {
  if (N < 1 || k < 0 || k >= N) throw ConfigError("cat preset needs 0 <= k < N");
  Protocol p;
  p.name = "cat";
  InteractionStep s;
  s.g = g;
  s.comb.spacing = N;
  s.post = PostSelection::residue(residue_for_cat_order(0, k, N), N);
  p.steps.push_back(s);
  p.target = "cat:" + std::to_string(N) + ":" + std::to_string(k);
  return p;
}

// Expansion --------------------------------------------------------------------

CoefficientExpansion coefficient_expansion(const Protocol& p) {
  if (p.modes != 1) throw ConfigError("coefficient expansion is single-mode");
  std::map<std::pair<long long, long long>, ExpansionTerm> terms;
  auto key = [](cplx b) {
    return std::make_pair(std::llround(b.real() * 1e9), std::llround(b.imag() * 1e9));
  };
  terms[key(0.0)] = {0.0, 1.0};
  for (const auto& s : p.steps) {
    if (!s.comb.ideal()) throw ConfigError("coefficient expansion needs ideal combs");
    const int N = s.comb.spacing;
    const int k = step_cat_order(s);
    std::map<std::pair<long long, long long>, ExpansionTerm> next;
    for (const auto& [unused, t] : terms) {
      for (int m = 0; m < N; ++m) {
        const cplx beta = s.g * std::polar(1.0, 2.0 * kPi * m / N);
        const cplx w = std::polar(1.0 / N, -2.0 * kPi * k * m / N);
        // D(beta) D(t) = e^{i Im(beta t^*)} D(beta + t)
        const cplx phase = std::polar(1.0, std::imag(beta * std::conj(t.displacement)));
        const cplx total = beta + t.displacement;
        auto& slot = next[key(total)];
        if (slot.weight == 0.0) slot.displacement = total;
        slot.weight += w * phase * t.weight;
      }
    }
    terms = std::move(next);
  }
  CoefficientExpansion e;
  for (const auto& [unused, t] : terms) {
    if (t.weight != 0.0) e.terms.push_back(t);
  }
  if (p.initial.kind != InitialKind::kSquareGkp) {
    e.normalization = std::sqrt(expansion_probability(e, p.initial));
  }
  return e;
}

double expansion_probability(const CoefficientExpansion& e, const InitialState& seed) {
  if (seed.kind == InitialKind::kSquareGkp) {
    throw ConfigError("closed-form probability needs a vacuum or squeezed seed");
  }
  const double r = seed.kind == InitialKind::kSqueezed ? seed.squeeze.r : 0.0;
  const double ch = std::cosh(r), sh = std::sinh(r);
  const cplx rot = std::polar(1.0, seed.kind == InitialKind::kSqueezed ? seed.squeeze.theta : 0.0);
  // <seed| D(gamma) |seed> = exp(-|gamma cosh r + gamma^* e^{i theta} sinh r|^2 / 2)
  auto chi = [&](cplx gamma) {
    return std::exp(-0.5 * std::norm(gamma * ch + std::conj(gamma) * rot * sh));
  };
  cplx total = 0.0;
  for (const auto& t : e.terms) {
    for (const auto& s : e.terms) {
      const cplx phase = std::polar(1.0, -std::imag(t.displacement * std::conj(s.displacement)));
      total += std::conj(t.weight) * s.weight * phase * chi(s.displacement - t.displacement);
    }
  }
  return total.real();
}

PhotonState expansion_state(const CoefficientExpansion& e, const InitialState& seed, int cutoff) {
  CVector out = CVector::Zero(cutoff + 1);
  if (seed.kind == InitialKind::kVacuum) {
    for (const auto& t : e.terms) out += t.weight * make_coherent(t.displacement, cutoff).amplitudes;
    return PhotonState(out);
  }
  const PhotonState s = initial_photon_state(seed, cutoff);
  for (const auto& t : e.terms) {
    out += t.weight * (make_displacement(t.displacement, cutoff).entries * s.amplitudes);
  }
  return PhotonState(out, s.norm_leak);
}

double row2_probability(int m) {
  if (m < 1) throw Error("row2_probability needs m >= 1");
  struct Term {
    cplx beta;
    cplx amp;
  };
  std::vector<Term> terms;
  auto log_binom = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  for (int n1 = 0; n1 <= 4 * m; ++n1) {
    for (int n2 = 0; n2 <= m; ++n2) {
      const double x = kSqrtPiOver2 * (2 * n2 - m);
      const double y = kSqrtPiOver8 * (2 * n1 - 4 * m);
      // C(4m,n1) C(m,n2) / 2^{5m}, so the squared norm carries 1/4^{5m}.
      const double mag = std::exp(log_binom(4 * m, n1) + log_binom(m, n2) - 5.0 * m * std::log(2.0));
      // D(x) D(iy) = e^{-ixy} D(x + iy)
      terms.push_back({cplx(x, y), std::polar(mag, -x * y)});
    }
  }
  cplx total = 0.0;
  for (const auto& a : terms) {
    for (const auto& b : terms) {
      const cplx ov = std::exp(-0.5 * (std::norm(a.beta) + std::norm(b.beta)) +
                               std::conj(a.beta) * b.beta);
      total += std::conj(a.amp) * b.amp * ov;
    }
  }
  return total.real();
}

double seeded_probability(int ne, double r) {
  if (ne < 1) throw Error("seeded_probability needs Ne >= 1");
  double total = 0.0;
  const double e2r = std::exp(2.0 * r);
  for (int n = 0; n <= 2 * ne; ++n) {
    const double lb = std::lgamma(2.0 * ne + 1.0) - std::lgamma(n + 1.0) - std::lgamma(2.0 * ne - n + 1.0);
    const double d = ne - n;
    total += std::exp(lb - ne * std::log(4.0) - kPi * d * d * e2r);
  }
  return total;
}

Protocol bell_preset(cplx g1, cplx g2, double input_db, int residue) {
  if (residue < 0 || residue > 3) throw ConfigError("Bell residue must be 0..3");
  Protocol p;
  p.name = "bell";
  p.modes = 2;
  p.initial.kind = InitialKind::kSquareGkp;
  p.initial.logical = 0;
  p.initial.delta = std::pow(10.0, -input_db / 20.0);
  InteractionStep s;
  s.g = g1;
  s.g2 = g2;
  s.comb.spacing = 4;
  s.post = PostSelection::residue(residue, 4);
  p.steps.push_back(s);
  // Truncated GKP seeds carry a small leak of their own.
  p.leak_tolerance = 1e-6;
  p.target = "bell";
  return p;
}

BellOutcome bell_protocol(cplx g1, cplx g2, double input_db, int residue, Engine engine,
                          int cutoff) {
  Protocol p = bell_preset(g1, g2, input_db, residue);
  p.engine = engine;
  if (cutoff > 0) p.cutoff_policy = {false, cutoff};

  BellOutcome b;
  b.residue = residue;
  b.delta = p.initial.delta;
  b.outcome = run_protocol(p);
  b.fidelities = {};
  for (const auto& f : bell_fidelities(b.outcome.vector, b.outcome.cutoff, b.delta)) {
    b.fidelities.emplace_back(f.label, f.value);
  }
  double best = -1.0;
  for (const auto& [label, value] : b.fidelities) {
    if (value > best) {
      best = value;
      b.best = label;
    }
  }
  return b;
}

}  // namespace gkpforge
