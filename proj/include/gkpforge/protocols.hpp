#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gkpforge/scatter.hpp"

namespace gkpforge {

enum class Engine { kAnalytic, kLadder, kFourier };

enum class InitialKind { kVacuum, kSqueezed, kSquareGkp };

struct InitialState {
  InitialKind kind = InitialKind::kVacuum;
  SqueezeParams squeeze;
  /// kSquareGkp: logical 0/1 and the finite-energy parameter.
  int logical = 0;
  double delta = 0.3;
};

struct CombSpec {
  int spacing = 2;
  EnvelopeKind envelope = EnvelopeKind::kIdeal;
  double sigma = 0.0;
  int shift = 0;
  int window = 0;  // 0 picks a converged window
  /// Quadratic dispersion phase -beta n^2 z applied before the interaction.
  double dispersion_beta = 0.0;
  double dispersion_z = 0.0;

  bool ideal() const { return envelope == EnvelopeKind::kIdeal; }
  ElectronComb build() const;
};

struct InteractionStep {
  cplx g = 0.0;
  CombSpec comb;
  PostSelection post;
  /// Coupling to the second mode (two-mode protocols share one electron).
  cplx g2 = 0.0;
};

struct CutoffPolicy {
  bool automatic = true;
  int cutoff = 0;
};

struct Protocol {
  std::string name;
  InitialState initial;
  int modes = 1;
  std::vector<InteractionStep> steps;
  Engine engine = Engine::kAnalytic;
  CutoffPolicy cutoff_policy;
  double g_max = 10.0;
  double leak_tolerance = kDefaultLeakTolerance;
  int theta_samples = 0;
  /// Mixture components lighter than this are dropped after each step.
  double ensemble_drop = 1e-14;
  /// Reference the preset aims at, e.g. "square:0", "hex:T".
  std::string target;
  /// Preset row and size when built from a preset, otherwise 0.
  int preset_row = 0;
  int preset_size = 0;
};

struct Outcome {
  int modes = 1;
  int cutoff = 0;
  /// Dominant pure component, normalised. Two-mode states are stored with
  /// mode 0 major.
  CVector vector;
  /// Mixture components (weight, normalised vector); one entry when pure.
  std::vector<std::pair<double, CVector>> ensemble;
  double probability = 1.0;
  std::vector<double> step_probabilities;
  double max_norm_leak = 0.0;
  int max_ladder_rows = 0;
  int theta_samples_used = 0;
  std::vector<std::string> diagnostics;

  PhotonState state() const;
  bool mixed() const { return ensemble.size() > 1; }
  double purity() const;
};

/// ceil(A + 6 sqrt(A) + 10), A = (sum |g| over steps)^2, plus room for a
/// squeezed or GKP seed.
int auto_cutoff(const Protocol& p);
int resolve_cutoff(const Protocol& p);

/// Throws ConfigError for invalid protocols, UnconvergedError when the
/// truncation leaks more than the tolerance and ZeroProbabilityError for a
/// branch that cannot occur.
Outcome run_protocol(const Protocol& p);

PhotonState initial_photon_state(const InitialState& init, int cutoff);

/// Preset rows 1..8. `m_or_ne` follows each row's electron-count column:
/// rows 5 and 8 take N_e, the others m.
Protocol table1_preset(int row, int m_or_ne);
int table1_electron_count(int row, int m_or_ne);
Protocol cat_preset(int N, cplx g, int k);

struct ExpansionTerm {
  cplx displacement;
  cplx weight;
};

/// prod_steps K_{N,k} = sum_t w_t D(beta_t), with equal displacements merged.
struct CoefficientExpansion {
  std::vector<ExpansionTerm> terms;
  double normalization = 1.0;  // sqrt of the branch probability on the seed
};

CoefficientExpansion coefficient_expansion(const Protocol& p);
/// || sum_t w_t D(beta_t) |seed> ||^2 from coherent overlaps, for vacuum or
/// squeezed-vacuum seeds.
double expansion_probability(const CoefficientExpansion& e, const InitialState& seed);
/// sum_t w_t D(beta_t) |seed> on the Fock basis, unnormalised.
PhotonState expansion_state(const CoefficientExpansion& e, const InitialState& seed, int cutoff);

/// Row 2 probability: || sum C(4m,n1) C(m,n2) D_x D_p |0> ||^2 / 4^{5m}.
double row2_probability(int m);
/// (1/4^Ne) sum_n C(2Ne, n) exp(-pi (Ne - n)^2 e^{2r}).
double seeded_probability(int ne, double r);

struct BellOutcome {
  Outcome outcome;
  int residue = 0;
  std::vector<std::pair<std::string, double>> fidelities;
  std::string best;
  double delta = 0.0;
};

/// Two-mode protocol behind bell_protocol; target "bell".
Protocol bell_preset(cplx g1, cplx g2, double input_db, int residue);

/// Two finite-energy square GKP |0> inputs at `input_db` peak squeezing,
/// one comb_4 electron coupled to both modes, residue post-selection.
BellOutcome bell_protocol(cplx g1, cplx g2, double input_db, int residue,
                          Engine engine = Engine::kAnalytic, int cutoff = 0);

std::string engine_name(Engine e);

}  // namespace gkpforge
