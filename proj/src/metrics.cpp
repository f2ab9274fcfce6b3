#include "gkpforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace gkpforge {

namespace {

const double kLatticeStep = std::sqrt(kPi / 2.0);
const double kRootPi = std::sqrt(kPi);

std::string logical_symbol(Logical l) {
  switch (l) {
    case Logical::kZero: return "0";
    case Logical::kOne: return "1";
    case Logical::kPlus: return "+";
    case Logical::kMinus: return "-";
    case Logical::kH: return "H";
    case Logical::kT: return "T";
  }
  return "0";
}

/// Maximises f over ln(delta) in [lo, hi]: a coarse scan then golden section.
std::pair<double, double> maximize_delta(const std::function<double(double)>& f, double lo,
                                         double hi) {
  const int n = 17;
  const double a = std::log(lo), b = std::log(hi);
  std::vector<double> xs(n), fs(n);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    xs[i] = a + (b - a) * i / (n - 1);
    fs[i] = f(std::exp(xs[i]));
    if (fs[i] > fs[best]) best = i;
  }
  double left = xs[std::max(best - 1, 0)], right = xs[std::min(best + 1, n - 1)];
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - ratio * (right - left), x2 = left + ratio * (right - left);
  double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
  for (int it = 0; it < 30; ++it) {
    if (f1 < f2) {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + ratio * (right - left);
      f2 = f(std::exp(x2));
    } else {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - ratio * (right - left);
      f1 = f(std::exp(x1));
    }
  }
  double bx = f1 > f2 ? x1 : x2, bf = std::max(f1, f2);
  if (fs[best] > bf) {
    bf = fs[best];
    bx = xs[best];
  }
  return {std::exp(bx), bf};
}

/// Square-lattice GKP codewords sum_u w_u G(x - u sqrt(pi)), u in 2Z + mu,
/// with x-squeezed Gaussian peaks of variance delta^2/2. Fock amplitudes come
/// from quadrature against Hermite functions, so only the requested cutoff is
/// ever formed; norms and codeword overlaps are exact lattice sums.
class SquareLattice {
 public:
  explicit SquareLattice(int cutoff) : cutoff_(cutoff) {}

  /// Amplitudes normalised on the full space; `leak` gets the weight above
  /// the cutoff.
  Eigen::VectorXd codeword(double mu, double delta, double* leak = nullptr) const {
    const double sigma = delta / std::sqrt(2.0);
    const double turning = std::sqrt(2.0 * cutoff_ + 1.0);
    // Trapezoid sums of Gaussian-windowed band-limited integrands converge
    // exponentially once 2 pi / h exceeds the bandwidth.
    const double h = 2.0 * kPi / (1.5 * (turning + 10.0 / sigma));
    const double half = 8.0 * sigma;
    const int points = static_cast<int>(std::ceil(half / h));
    const double g0 = std::pow(2.0 * kPi * sigma * sigma, -0.25);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cutoff_ + 1);
    for (double u : peaks(mu, delta)) {
      const double centre = u * kRootPi;
      if (std::abs(centre) - half > turning + 8.0) continue;
      const double w = weight(u, delta);
      for (int i = -points; i <= points; ++i) {
        const double t = i * h;
        const double f = w * g0 * std::exp(-t * t / (4.0 * sigma * sigma)) * h;
        const auto hn = hermite_functions(cutoff_, centre + t);
        out += f * Eigen::Map<const Eigen::VectorXd>(hn.data(), cutoff_ + 1);
      }
    }
    out /= std::sqrt(lattice_overlap(mu, mu, delta));
    if (leak != nullptr) *leak = std::max(0.0, 1.0 - out.squaredNorm());
    return out;
  }

  /// <mu|nu> of the normalised codewords on the full space.
  static double overlap(double mu, double nu, double delta) {
    return lattice_overlap(mu, nu, delta) /
           std::sqrt(lattice_overlap(mu, mu, delta) * lattice_overlap(nu, nu, delta));
  }

  /// Coefficients (a, b) of a|0> + b|1>, normalised on the full space.
  static std::pair<cplx, cplx> coefficients(Logical l, double delta) {
    cplx a = 1.0, b = 0.0;
    switch (l) {
      case Logical::kZero: break;
      case Logical::kOne: a = 0.0; b = 1.0; break;
      case Logical::kPlus: b = 1.0; break;
      case Logical::kMinus: b = -1.0; break;
      case Logical::kH: a = std::cos(kPi / 8.0); b = std::sin(kPi / 8.0); break;
      case Logical::kT: b = std::polar(1.0, kPi / 4.0); break;
    }
    const double n2 = std::norm(a) + std::norm(b) + 2.0 * std::real(std::conj(a) * b) * overlap(0, 1, delta);
    return {a / std::sqrt(n2), b / std::sqrt(n2)};
  }

  CVector logical(Logical l, double delta, double* leak = nullptr) const {
    const auto [a, b] = coefficients(l, delta);
    CVector v = a * codeword(0, delta).cast<cplx>();
    if (b != 0.0) v += b * codeword(1, delta).cast<cplx>();
    if (leak != nullptr) *leak = std::max(0.0, 1.0 - v.squaredNorm());
    return v;
  }

 private:
  static double weight(double u, double delta) { return std::exp(-delta * delta * kPi * u * u / 2.0); }

  static std::vector<double> peaks(double mu, double delta) {
    std::vector<double> out;
    for (int j = 0;; ++j) {
      bool any = false;
      for (double u : {mu + 2.0 * j, mu - 2.0 * (j + 1)}) {
        if (weight(u, delta) > 1e-13) {
          out.push_back(u);
          any = true;
        }
      }
      if (!any) break;
    }
    return out;
  }

  /// sum_{u, v} w_u w_v <G_u|G_v> with <G_a|G_b> = exp(-pi (u - v)^2 / (4 delta^2)).
  static double lattice_overlap(double mu, double nu, double delta) {
    double total = 0.0;
    for (double u : peaks(mu, delta)) {
      for (double v : peaks(nu, delta)) {
        total += weight(u, delta) * weight(v, delta) * std::exp(-kPi * (u - v) * (u - v) / (4.0 * delta * delta));
      }
    }
    return total;
  }

  int cutoff_;
};

CVector pad_to(const CVector& v, Eigen::Index n) {
  if (v.size() == n) return v;
  CVector out = CVector::Zero(n);
  const Eigen::Index m = std::min(n, v.size());
  out.head(m) = v.head(m);
  return out;
}

/// sum_i w_i |<psi|v_i>|^2 / sum_i w_i. Truncated references pass their
/// full-space norm so that the cut-off weight is not renormalised away.
double mixture_fidelity(const std::vector<std::pair<double, CVector>>& ensemble, const CVector& psi,
                        double psi_norm2 = -1.0) {
  if (psi_norm2 < 0.0) psi_norm2 = psi.squaredNorm();
  double total = 0.0, weight = 0.0;
  for (const auto& [w, v] : ensemble) {
    total += w * std::norm(pad_to(psi, v.size()).dot(v));
    weight += w;
  }
  return total / (weight * psi_norm2);
}

}  // namespace

// Squeezing --------------------------------------------------------------------

PeakFit squeezing_peaks(const PhotonState& state, double angle, const PeakFitConfig& cfg) {
  const double extent = std::sqrt(2.0 * state.cutoff()) + cfg.extent_margin;
  const int n = static_cast<int>(std::ceil(2.0 * extent / cfg.spacing)) + 1;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = -extent + i * cfg.spacing;
  const auto psi = quadrature_wavefunction(state, angle, grid);
  std::vector<double> rho(n);
  for (int i = 0; i < n; ++i) rho[i] = std::norm(psi[i]);
  const double top = *std::max_element(rho.begin(), rho.end());
  if (!(top > 0.0)) throw Error("quadrature density vanishes");

  // Every resolvable maximum bounds a segment; only those above the
  // threshold enter the variance, so faint peaks are not merged into
  // their neighbours.
  std::vector<int> maxima;
  for (int i = 1; i + 1 < n; ++i) {
    if (rho[i] > 1e-12 * top && rho[i] > rho[i - 1] && rho[i] >= rho[i + 1]) maxima.push_back(i);
  }

  PeakFit fit;
  fit.angle = angle;
  double weighted_var = 0.0, total = 0.0;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    if (rho[maxima[k]] < cfg.threshold * top) continue;
    const int lo = k == 0 ? 0 : (maxima[k - 1] + maxima[k]) / 2;
    const int hi = k + 1 == maxima.size() ? n - 1 : (maxima[k] + maxima[k + 1]) / 2;
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = lo; i <= hi; ++i) {
      w += rho[i];
      m1 += rho[i] * grid[i];
      m2 += rho[i] * grid[i] * grid[i];
    }
    m1 /= w;
    const double var = m2 / w - m1 * m1;
    fit.centers.push_back(m1);
    fit.weights.push_back(w * cfg.spacing);
    weighted_var += w * var;
    total += w;
  }
  if (total == 0.0) throw Error("no quadrature peak above threshold");
  fit.variance = weighted_var / total;
  fit.db = 10.0 * std::log10(0.5 / fit.variance);
  return fit;
}

double squeezing_db_peaks(const PhotonState& state, double angle) {
  return squeezing_peaks(state, angle).db;
}

double squeezing_db_vacuum_scheme(int m) { return 10.0 * std::log10(1.0 + kPi * m); }

double squeezing_db_seeded(int ne, double r) {
  return 10.0 * std::log10(std::exp(-2.0 * r) + ne * kPi);
}

// References -------------------------------------------------------------------

std::string GKPReference::label() const {
  return std::string(lattice == Lattice::kSquare ? "square:" : "hex:") + logical_symbol(logical);
}

GKPReference GKPReference::parse(const std::string& label) {
  const auto colon = label.find(':');
  if (colon == std::string::npos) throw ConfigError("reference label needs lattice:logical: " + label);
  const std::string lattice = label.substr(0, colon);
  std::string rest = label.substr(colon + 1);
  std::string construction;
  if (const auto second = rest.find(':'); second != std::string::npos) {
    construction = rest.substr(second + 1);
    rest = rest.substr(0, second);
  }
  GKPReference ref;
  if (lattice == "square") ref.lattice = Lattice::kSquare;
  else if (lattice == "hex") ref.lattice = Lattice::kHexagonal;
  else throw ConfigError("unknown lattice: " + lattice);
  bool found = false;
  for (Logical l : {Logical::kZero, Logical::kOne, Logical::kPlus, Logical::kMinus, Logical::kH,
                    Logical::kT}) {
    if (rest == logical_symbol(l)) {
      ref.logical = l;
      found = true;
    }
  }
  if (!found) throw ConfigError("unknown logical state: " + rest);
  const bool magic = ref.logical == Logical::kH || ref.logical == Logical::kT;
  ref.construction = ref.lattice == Lattice::kHexagonal || magic ? Construction::kProtocolLimit
                                                                 : Construction::kEnvelopeComb;
  if (construction == "limit") ref.construction = Construction::kProtocolLimit;
  else if (construction == "envelope") ref.construction = Construction::kEnvelopeComb;
  else if (!construction.empty()) throw ConfigError("unknown construction: " + construction);
  if (ref.lattice == Lattice::kHexagonal && ref.construction == Construction::kEnvelopeComb) {
    throw ConfigError("hexagonal references are built from the protocol limit only");
  }
  return ref;
}

PhotonState make_cat_reference(int N, int k, cplx alpha, int cutoff) {
  CVector v = CVector::Zero(cutoff + 1);
  for (int m = 0; m < N; ++m) {
    const cplx beta = alpha * std::polar(1.0, 2.0 * kPi * m / N);
    v += std::polar(1.0, -2.0 * kPi * k * m / N) * make_coherent(beta, cutoff).amplitudes;
  }
  const double norm = v.norm();
  if (!(norm > 1e-12)) throw ZeroNormError("cat superposition vanishes");
  return PhotonState(v / norm);
}

PhotonState square_gkp(double mu, double delta, int cutoff) {
  if (!(delta > 0.0)) throw ConfigError("GKP delta must be positive");
  double leak = 0.0;
  const Eigen::VectorXd v = SquareLattice(cutoff).codeword(mu, delta, &leak);
  return PhotonState(v.cast<cplx>(), leak);
}

std::pair<int, int> protocol_limit_row(const GKPReference& ref) {
  if (ref.lattice == Lattice::kSquare) {
    switch (ref.logical) {
      case Logical::kZero: return {2, 12};
      case Logical::kOne: return {2, 13};
      case Logical::kMinus: return {4, 12};
      case Logical::kH: return {3, ref.limit_size > 0 ? ref.limit_size : 12};
      default: break;
    }
  } else {
    switch (ref.logical) {
      case Logical::kZero: return {6, 12};
      case Logical::kT: return {7, ref.limit_size > 0 ? ref.limit_size : 12};
      default: break;
    }
  }
  throw ConfigError("no protocol limit for reference " + ref.label());
}

PhotonState make_gkp_reference(const GKPReference& ref, int cutoff) {
  if (ref.construction == Construction::kEnvelopeComb) {
    if (ref.lattice != Lattice::kSquare) throw ConfigError("hexagonal envelope references unsupported");
    double leak = 0.0;
    const CVector v = SquareLattice(cutoff).logical(ref.logical, ref.delta, &leak);
    return PhotonState(v, leak);
  }
  const auto [row, m] = protocol_limit_row(ref);
  const Protocol p = table1_preset(row, m);
  const CoefficientExpansion e = coefficient_expansion(p);
  const PhotonState v = expansion_state(e, p.initial, cutoff);
  const CVector amps = v.amplitudes / e.normalization;
  return PhotonState(amps, std::max(0.0, 1.0 - amps.squaredNorm()));
}

FidelityEntry best_fidelity(const PhotonState& state, const GKPReference& ref) {
  Outcome o;
  o.cutoff = state.cutoff();
  o.vector = state.amplitudes.normalized();
  o.ensemble = {{1.0, o.vector}};
  return best_fidelity(o, ref);
}

FidelityEntry best_fidelity(const Outcome& outcome, const GKPReference& ref) {
  FidelityEntry e;
  e.label = ref.label();
  if (ref.construction == Construction::kProtocolLimit) {
    e.value = mixture_fidelity(outcome.ensemble, make_gkp_reference(ref, outcome.cutoff).amplitudes, 1.0);
    return e;
  }
  if (ref.lattice != Lattice::kSquare) throw ConfigError("hexagonal envelope references unsupported");
  const SquareLattice lattice(outcome.cutoff);
  const auto [delta, value] = maximize_delta(
      [&](double d) { return mixture_fidelity(outcome.ensemble, lattice.logical(ref.logical, d), 1.0); },
      0.05, 1.0);
  e.value = std::clamp(value, 0.0, 1.0);
  e.delta = delta;
  return e;
}

std::vector<FidelityEntry> fidelity_report(const PhotonState& state,
                                           const std::vector<GKPReference>& refs) {
  std::vector<FidelityEntry> out;
  for (const auto& r : refs) out.push_back(best_fidelity(state, r));
  return out;
}

double ensemble_fidelity(const Outcome& outcome, const CVector& psi) {
  return mixture_fidelity(outcome.ensemble, psi);
}

// Bell -------------------------------------------------------------------------

std::vector<FidelityEntry> bell_fidelities(const CVector& two_mode, int cutoff, double delta_hint) {
  const int d = cutoff + 1;
  if (two_mode.size() != static_cast<Eigen::Index>(d) * d) throw Error("two-mode size mismatch");
  Eigen::Map<const CMatrix> x(two_mode.data(), d, d);  // x(n1, n0)
  const double n2 = two_mode.squaredNorm();
  const SquareLattice lattice(cutoff);
  // <a (x) b | psi> = b^dagger x conj(a)
  auto amp = [&](const CVector& a, const CVector& b) { return b.dot(x * a.conjugate()); };
  const std::vector<std::string> labels{"|++>+|-->", "|+->+|-+>", "|01>+|10>", "|01>-|10>"};
  // Single-mode states as coefficients on (|0>, |1>); codeword overlaps
  // give the exact norm of each reference.
  using Pair = std::pair<cplx, cplx>;
  const double r = 1.0 / std::sqrt(2.0);
  const Pair zero{1.0, 0.0}, one{0.0, 1.0}, plus{r, r}, minus{r, -r};
  auto value = [&](int which, double delta) {
    const CVector c0 = lattice.codeword(0, delta).cast<cplx>();
    const CVector c1 = lattice.codeword(1, delta).cast<cplx>();
    const double ov = SquareLattice::overlap(0, 1, delta);
    auto vec = [&](const Pair& q) { CVector v = q.first * c0 + q.second * c1; return v; };
    auto inner = [&](const Pair& a, const Pair& b) {
      return std::conj(a.first) * b.first + std::conj(a.second) * b.second +
             (std::conj(a.first) * b.second + std::conj(a.second) * b.first) * ov;
    };
    std::vector<std::pair<Pair, Pair>> terms;
    double sign = 1.0;
    switch (which) {
      case 0: terms = {{plus, plus}, {minus, minus}}; break;
      case 1: terms = {{plus, minus}, {minus, plus}}; break;
      case 2: terms = {{zero, one}, {one, zero}}; break;
      default: terms = {{zero, one}, {one, zero}}; sign = -1.0; break;
    }
    const cplx a = amp(vec(terms[0].first), vec(terms[0].second)) +
                   sign * amp(vec(terms[1].first), vec(terms[1].second));
    double norm2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double s = (i == j ? 1.0 : sign);
        norm2 += s * std::real(inner(terms[i].first, terms[j].first) * inner(terms[i].second, terms[j].second));
      }
    }
    return std::norm(a) / (norm2 * n2);
  };
  std::vector<FidelityEntry> out;
  for (int i = 0; i < 4; ++i) {
    const auto [delta, f] =
        maximize_delta([&](double dl) { return value(i, dl); }, 0.5 * delta_hint, std::min(1.0, 2.0 * delta_hint));
    out.push_back({labels[i], std::clamp(f, 0.0, 1.0), delta});
  }
  return out;
}

// Bundles ----------------------------------------------------------------------

namespace {
bool hexagonal(const Protocol& p) { return p.target.rfind("hex", 0) == 0; }
}  // namespace

std::vector<double> squeezing_axes(const Protocol& p) {
  // Peaks form across the displacement directions.
  if (hexagonal(p)) return {kPi / 6.0, kPi / 2.0, 5.0 * kPi / 6.0};
  return {0.0, kPi / 2.0};
}

std::vector<GKPReference> default_references(const Protocol& p) {
  std::vector<GKPReference> refs;
  if (p.target.empty() || p.target == "bell" || p.target.rfind("cat:", 0) == 0) return refs;
  const GKPReference target = GKPReference::parse(p.target);
  if (target.lattice == Lattice::kSquare) {
    for (const char* l : {"square:0", "square:1", "square:+", "square:-"}) {
      refs.push_back(GKPReference::parse(l));
    }
    if (target.logical == Logical::kH || target.logical == Logical::kT) refs.push_back(target);
  } else {
    refs.push_back(target);
  }
  for (auto& r : refs) {
    const bool magic = r.logical == Logical::kH || r.logical == Logical::kT;
    if (magic && p.preset_size > 0) r.limit_size = 12 + p.preset_size % 2;
  }
  return refs;
}

MetricsBundle evaluate_metrics(const Outcome& outcome, const Protocol& p) {
  MetricsBundle b;
  b.probability = outcome.probability;
  if (outcome.mixed()) {
    b.warnings.push_back("state is mixed (purity " + std::to_string(outcome.purity()) +
                         "); squeezing uses the dominant component");
  }
  if (outcome.modes == 2) {
    b.fidelities = bell_fidelities(outcome.vector, outcome.cutoff, p.initial.delta);
    return b;
  }
  const PhotonState state = outcome.state();
  for (double axis : squeezing_axes(p)) {
    try {
      PeakFit fit = squeezing_peaks(state, axis);
      b.squeezing_db.emplace_back(axis, fit.db);
      b.peak_fit.push_back(std::move(fit));
    } catch (const Error& e) {
      b.warnings.push_back(std::string("squeezing: ") + e.what());
    }
  }
  if (p.target.rfind("cat:", 0) == 0 && !p.steps.empty()) {
    int N = 0, k = 0;
    if (std::sscanf(p.target.c_str(), "cat:%d:%d", &N, &k) == 2) {
      const PhotonState ref = make_cat_reference(N, k, p.steps.front().g, outcome.cutoff);
      b.fidelities.push_back({p.target, mixture_fidelity(outcome.ensemble, ref.amplitudes), {}});
    }
  }
  for (const auto& ref : default_references(p)) {
    try {
      b.fidelities.push_back(best_fidelity(outcome, ref));
    } catch (const Error& e) {
      b.warnings.push_back("fidelity " + ref.label() + ": " + e.what());
    }
  }
  return b;
}

// Robustness -------------------------------------------------------------------

JitterResult jitter_robustness(const Protocol& p, double delta_g, int samples, std::uint64_t seed) {
  const Outcome nominal = run_protocol(p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  JitterResult r;
  r.samples = samples;
  if (samples <= 0) return r;
  std::vector<double> values;
  for (int s = 0; s < samples; ++s) {
    Protocol q = p;
    for (auto& step : q.steps) {
      const double mag = std::abs(step.g) + delta_g * normal(rng);
      step.g = std::polar(mag, std::arg(step.g));
    }
    const Outcome o = run_protocol(q);
    values.push_back(mixture_fidelity(o.ensemble, nominal.vector));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= samples;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  r.mean = mean;
  r.stddev = samples > 1 ? std::sqrt(var / (samples - 1)) : 0.0;
  return r;
}

QuadraticFit fit_quadratic_loss(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("quadratic fit needs matching samples");
  const double n = static_cast<double>(x.size());
  double su = 0, sy = 0, suu = 0, suy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] * x[i];
    su += u;
    sy += y[i];
    suu += u * u;
    suy += u * y[i];
  }
  const double slope = (n * suy - su * sy) / (n * suu - su * su);
  QuadraticFit f;
  f.intercept = (sy - slope * su) / n;
  f.coefficient = -slope;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.intercept + slope * x[i] * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

CombFidelity finite_comb_cat_fidelity(double sigma, cplx g, int N, int k, double window_sigmas) {
  const int cutoff = coherent_cutoff(std::abs(g));
  const int window = std::max(N, static_cast<int>(std::ceil(7.0 * sigma)));
  const ElectronComb comb = gaussian_comb(N, sigma, window);
  JointState j = make_joint(comb, vacuum(cutoff));
  scatter_ladder(j, g);
  const Heralded h = postselect(j, PostSelection::residue(residue_for_cat_order(0, k, N), N));
  const PhotonState ref = make_cat_reference(N, k, g, cutoff);
  CombFidelity out;
  double weighted = 0.0;
  // Emission lowers the envelope centre by the mean photon number |g|^2.
  const double centre = -std::norm(g);
  for (const auto& b : h.branches) {
    if (std::abs(b.ladder_index - centre) > window_sigmas * sigma) continue;
    weighted += b.probability * std::norm(ref.amplitudes.dot(b.photon));
    out.probability += b.probability;
    ++out.branches;
  }
  if (out.branches == 0) throw ZeroProbabilityError("no outcome inside the envelope window");
  out.fidelity = weighted / out.probability;
  return out;
}

namespace {
constexpr int kCombHeadroom = 16;
// Dropped mixture weight bounds the fidelity error.
constexpr double kCombEnsembleDrop = 1e-10;

double finite_comb_fidelity(const Protocol& p, double sigma, Engine engine, double beta, double z) {
  Protocol ideal = p;
  ideal.engine = Engine::kAnalytic;
  const Outcome reference = run_protocol(ideal);
  Protocol q = p;
  q.engine = engine;
  // Off-comb energies spread the photon distribution; extra headroom keeps
  // the Gaussian-comb run inside the leak tolerance.
  const int c = reference.cutoff + kCombHeadroom;
  q.cutoff_policy = {false, c};
  q.ensemble_drop = kCombEnsembleDrop;
  for (auto& s : q.steps) {
    s.comb.envelope = EnvelopeKind::kGaussian;
    s.comb.sigma = sigma;
    s.comb.dispersion_beta = beta;
    s.comb.dispersion_z = z;
  }
  const int d0 = reference.cutoff + 1, d = c + 1;
  CVector padded;
  if (p.modes == 1) {
    padded = CVector::Zero(d);
    padded.head(d0) = reference.vector;
  } else {
    CMatrix x = CMatrix::Zero(d, d);
    x.topLeftCorner(d0, d0) = Eigen::Map<const CMatrix>(reference.vector.data(), d0, d0);
    padded = Eigen::Map<const CVector>(x.data(), d * d);
  }
  return mixture_fidelity(run_protocol(q).ensemble, padded);
}
}  // namespace

double comb_width_fidelity(const Protocol& p, double sigma, Engine engine) {
  return finite_comb_fidelity(p, sigma, engine, 0.0, 0.0);
}

double dispersion_fidelity(const Protocol& p, double sigma, double beta, double z) {
  return finite_comb_fidelity(p, sigma, Engine::kLadder, beta, z);
}

std::vector<XGateStep> xgate_chain(double r, cplx g, int max_steps) {
  std::vector<XGateStep> out;
  const GKPReference zero = GKPReference::parse("square:0");
  const GKPReference one = GKPReference::parse("square:1");
  for (int s = 0; s <= max_steps; ++s) {
    Protocol p;
    p.initial.kind = InitialKind::kSqueezed;
    p.initial.squeeze = {r, 0.0};
    for (int i = 0; i < s; ++i) {
      InteractionStep step;
      step.g = g;
      p.steps.push_back(step);
    }
    const Outcome o = run_protocol(p);
    out.push_back({s, best_fidelity(o, zero).value, best_fidelity(o, one).value});
  }
  return out;
}

}  // namespace gkpforge
