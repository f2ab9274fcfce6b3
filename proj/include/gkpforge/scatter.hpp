#pragma once

#include <vector>

#include "gkpforge/electron.hpp"
#include "gkpforge/fock.hpp"

namespace gkpforge {

enum class Boundary {
  kOpen,      // finite ladder; rows are added so nothing reaches the edge
  kPeriodic,  // ring of ladder states, b exactly unitary (ideal combs)
};

/// Electron ladder tensor photon modes. Row r is ladder index
/// first_index + r; column is the photon index, mode 0 major:
/// col = n0 * (cutoff + 1) + n1 for two modes.
struct JointState {
  int first_index = 0;
  int modes = 1;
  int cutoff = 0;
  Boundary boundary = Boundary::kOpen;
  CMatrix amplitudes;

  int rows() const { return static_cast<int>(amplitudes.rows()); }
  int last_index() const { return first_index + rows() - 1; }
  int photon_dim() const { return cutoff + 1; }
  double norm() const { return amplitudes.norm(); }
  int photon_number(int mode, int col) const;

  /// <a^dagger a (all modes) + n_e>.
  double total_excitation() const;
  /// Population in the top `levels` Fock states of any mode.
  double photon_edge_population(int levels = 3) const;
  /// Population within `rows` ladder states of either open-window edge.
  double ladder_edge_population(int rows) const;
};

/// comb (x) photon. A periodic state folds the comb onto a ring of
/// `ring_size` ladder states (a multiple of the comb spacing).
JointState make_joint(const ElectronComb& comb, const PhotonState& photon,
                      Boundary boundary = Boundary::kOpen, int ring_size = 0);
JointState make_joint(const ElectronComb& comb, const PhotonState& ph1, const PhotonState& ph2,
                      Boundary boundary = Boundary::kOpen, int ring_size = 0);

/// exp(g b a_mode^dagger - g^* b^dagger a_mode) via the conserved
/// a^dagger a + n_e: every block is the truncated displacement generator.
void scatter_ladder(JointState& joint, cplx g, int mode = 0);
/// The same unitary through the angle basis, where it acts as D(g e^{-i theta}).
/// Open windows are grown like scatter_ladder; `theta_samples` is raised to
/// the smallest alias-free count when needed. Returns the count used.
int scatter_fourier(JointState& joint, cplx g, int theta_samples = 0, int mode = 0);
/// S2 S1 on a two-mode joint state in one pass of the angle basis.
int scatter_fourier_two_mode(JointState& joint, cplx g1, cplx g2, int theta_samples = 0);

JointState joint_scatter_ladder(const ElectronComb& comb, const PhotonState& photon, cplx g);
JointState joint_scatter_fourier(const ElectronComb& comb, const PhotonState& photon, cplx g,
                                 int theta_samples = 0);
JointState two_mode_scatter(const ElectronComb& comb, const PhotonState& ph1,
                            const PhotonState& ph2, cplx g1, cplx g2);

/// Alias-free angle count for the current joint window.
int minimum_theta_samples(const JointState& joint);

struct PostSelection {
  enum class Rule { kResidue, kExact, kParity };
  Rule rule = Rule::kResidue;
  int k = 0;
  int modulus = 2;

  static PostSelection residue(int k, int modulus);
  static PostSelection exact(int n);
  static PostSelection parity(bool odd);
  bool selects(int ladder_index) const;
};

/// One exact electron-energy outcome.
struct HeraldedBranch {
  int ladder_index = 0;
  double probability = 0.0;
  CVector photon;  // normalised
};

struct Heralded {
  int modes = 1;
  int cutoff = 0;
  double probability = 0.0;
  std::vector<HeraldedBranch> branches;
  /// Dominant eigenvector of the conditional photonic state.
  CVector state;
  /// Its eigenvalue; 1 when the branches are all the same pure state.
  double principal_weight = 1.0;

  PhotonState photon_state() const;
  /// Eigen-decomposition of the conditional state; weights sum to 1.
  std::vector<std::pair<double, CVector>> ensemble(double drop_below = 1e-14) const;
};

inline constexpr double kZeroProbability = 1e-300;

/// Throws ZeroProbabilityError when the rule selects no weight.
Heralded postselect(const JointState& joint, const PostSelection& rule);

/// Compresses weighted pure states by diagonalising their Gram matrix.
std::vector<std::pair<double, CVector>> compress_ensemble(
    const std::vector<std::pair<double, CVector>>& members, double drop_below = 1e-14,
    int max_members = 64);

/// K_{N,k} = (1/N) sum_m e^{-2 pi i k m / N} D(g e^{2 pi i m / N}).
OperatorMatrix conditional_kraus(cplx g, int N, int k, int cutoff);
PhotonState apply_kraus(const OperatorMatrix& kraus, const PhotonState& state);
/// K_{N,k} applied without forming K, from one real displacement matrix.
CVector apply_cat_kraus(const CMatrix& real_displacement, cplx g, int N, int k, const CVector& v);
/// Two-mode version: (1/N) sum_m w_m D1(g1 z^m) (x) D2(g2 z^m) on a
/// (cutoff+1)^2 vector, mode 0 major.
CVector apply_two_mode_kraus(cplx g1, cplx g2, int N, int k, int cutoff, const CVector& v);

/// P_N^k on vacuum from coherent overlaps.
double cat_probability(cplx g, int N, int k);

/// Cat order heralded by ladder residue r for an ideal comb shifted by m.
int cat_order_for_residue(int comb_shift, int residue, int N);
int residue_for_cat_order(int comb_shift, int k, int N);

}  // namespace gkpforge
