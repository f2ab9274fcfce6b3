#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gkpforge/protocols.hpp"

namespace gkpforge {

// Squeezing --------------------------------------------------------------------

struct PeakFitConfig {
  double spacing = 0.005;          // quadrature grid step
  double threshold = 0.01;         // peaks below this fraction of the max are ignored
  double extent_margin = 3.0;      // grid covers +-(sqrt(2 cutoff) + margin)
};

struct PeakFit {
  double angle = 0.0;
  double db = 0.0;
  double variance = 0.0;
  std::vector<double> centers;
  std::vector<double> weights;
};

/// Probability-weighted within-peak variance of |psi_angle(x)|^2, segmented
/// at midpoints between local maxima. Throws Error when no peak is found.
PeakFit squeezing_peaks(const PhotonState& state, double angle, const PeakFitConfig& cfg = {});
double squeezing_db_peaks(const PhotonState& state, double angle);

/// 10 log10(1 + pi m).
double squeezing_db_vacuum_scheme(int m);
/// 10 log10(e^{-2r} + N_e pi).
double squeezing_db_seeded(int ne, double r);

// References -------------------------------------------------------------------

enum class Lattice { kSquare, kHexagonal };
enum class Logical { kZero, kOne, kPlus, kMinus, kH, kT };
enum class Construction { kEnvelopeComb, kProtocolLimit };

struct GKPReference {
  Lattice lattice = Lattice::kSquare;
  Logical logical = Logical::kZero;
  double delta = 0.3;
  Construction construction = Construction::kEnvelopeComb;
  /// Protocol-limit size for magic states (rows 3 and 7); 0 picks 12. The
  /// Pauli frame of those rows follows the parity of m.
  int limit_size = 0;

  std::string label() const;
  /// "square:0", "square:+", "hex:T", ...; protocol_limit is the default
  /// for hexagonal and magic labels.
  static GKPReference parse(const std::string& label);
};

/// Normalised N-component cat of order k. Throws ZeroNormError when the
/// superposition vanishes.
PhotonState make_cat_reference(int N, int k, cplx alpha, int cutoff);

/// sum_j e^{-delta^2 pi (2j+mu)^2 / 2} D(sqrt(pi/2)(2j+mu)) S(-ln delta)|0>.
PhotonState square_gkp(double mu, double delta, int cutoff);

PhotonState make_gkp_reference(const GKPReference& ref, int cutoff);

/// Preset row and m used for protocol-limit references.
std::pair<int, int> protocol_limit_row(const GKPReference& ref);

struct FidelityEntry {
  std::string label;
  double value = 0.0;
  std::optional<double> delta;
};

/// Fidelity maximised over delta in [0.05, 1] for envelope references.
FidelityEntry best_fidelity(const PhotonState& state, const GKPReference& ref);
std::vector<FidelityEntry> fidelity_report(const PhotonState& state,
                                           const std::vector<GKPReference>& refs);
/// Mixed states: sum_i w_i |<ref|v_i>|^2, maximised over delta.
FidelityEntry best_fidelity(const Outcome& outcome, const GKPReference& ref);

/// <psi|rho|psi> for a normalised psi against an outcome's ensemble.
double ensemble_fidelity(const Outcome& outcome, const CVector& psi);

// Bell -------------------------------------------------------------------------

/// Fidelities of a two-mode state to the four square GKP Bell states
/// |++>+|-->, |+->+|-+>, |01>+|10>, |01>-|10>, optimised over delta.
std::vector<FidelityEntry> bell_fidelities(const CVector& two_mode, int cutoff,
                                           double delta_hint);

// Bundles ----------------------------------------------------------------------

struct MetricsBundle {
  std::vector<std::pair<double, double>> squeezing_db;  // (axis angle, dB)
  std::vector<FidelityEntry> fidelities;
  double probability = 0.0;
  std::vector<PeakFit> peak_fit;
  std::vector<std::string> warnings;
};

/// Quadrature axes used for a protocol's squeezing: {0, pi/2} for square
/// lattices, {pi/6, pi/2, 5pi/6} (orthogonal to the three displacement
/// directions) for hexagonal ones.
std::vector<double> squeezing_axes(const Protocol& p);
std::vector<GKPReference> default_references(const Protocol& p);
MetricsBundle evaluate_metrics(const Outcome& outcome, const Protocol& p);

// Robustness -------------------------------------------------------------------

struct JitterResult {
  double mean = 1.0;
  double stddev = 0.0;
  int samples = 0;
};

/// Couplings drawn as |g| ~ Normal(|g|, delta_g) per step with fixed phase;
/// fidelity of each sample's output to the nominal output. Deterministic for
/// a given seed.
JitterResult jitter_robustness(const Protocol& p, double delta_g, int samples, std::uint64_t seed);

struct QuadraticFit {
  double intercept = 0.0;
  double coefficient = 0.0;  // y = intercept - coefficient x^2
  double r_squared = 0.0;
};
QuadraticFit fit_quadratic_loss(const std::vector<double>& x, const std::vector<double>& y);

struct CombFidelity {
  double fidelity = 0.0;
  double probability = 0.0;
  int branches = 0;
};

/// Gaussian comb (spacing N, width sigma) on vacuum with coupling g: fidelity
/// of every exact-energy outcome within +-window_sigmas sigma of the centre to
/// the ideal cat of the matching order, weighted by branch probability.
CombFidelity finite_comb_cat_fidelity(double sigma, cplx g, int N = 2, int k = 0,
                                      double window_sigmas = 3.0);

/// Runs `p` with every comb replaced by a Gaussian comb of width sigma and
/// returns the fidelity of the resulting (mixed) state to the ideal-comb output.
double comb_width_fidelity(const Protocol& p, double sigma, Engine engine = Engine::kLadder);

/// Same comparison for an ideal-comb protocol with dispersion phases
/// -beta n^2 z on Gaussian combs of width sigma.
double dispersion_fidelity(const Protocol& p, double sigma, double beta, double z);

struct XGateStep {
  int steps = 0;
  double fidelity_zero = 0.0;
  double fidelity_one = 0.0;
};

/// Squeezed seed S(r, 0) followed by 0..max_steps even-post-selected
/// interactions at g; fidelities to delta-optimised square |0> and |1>.
std::vector<XGateStep> xgate_chain(double r, cplx g, int max_steps);

}  // namespace gkpforge
