#include <gtest/gtest.h>

#include <cmath>

#include "gkpforge/scatter.hpp"

using namespace gkpforge;

namespace {

const double kG = std::sqrt(kPi / 2.0);

double joint_fidelity(const JointState& a, const JointState& b) {
  EXPECT_EQ(a.first_index, b.first_index);
  EXPECT_EQ(a.rows(), b.rows());
  const cplx ov = (a.amplitudes.conjugate().cwiseProduct(b.amplitudes)).sum();
  return std::norm(ov) / (a.amplitudes.squaredNorm() * b.amplitudes.squaredNorm());
}

// <alpha|beta> for coherent states.
cplx coherent_overlap(cplx a, cplx b) {
  return std::exp(-0.5 * (std::norm(a) + std::norm(b)) + std::conj(a) * b);
}

}  // namespace

TEST(CatProbability, ClosedFormsFromOverlaps) {
  const double even = 0.5 * (1.0 + std::exp(-kPi));
  EXPECT_NEAR(cat_probability(kG, 2, 0), even, 1e-14);
  EXPECT_NEAR(cat_probability(kG, 2, 0), 0.52161, 1e-5);
  EXPECT_NEAR(cat_probability(kG, 2, 1), 0.47839, 1e-5);
  EXPECT_NEAR(cat_probability(4.0, 2, 0), 0.5 * (1.0 + std::exp(-32.0)), 1e-15);
  // Independent route: N=3 via the Gram matrix of the three coherent states.
  const cplx g(0.8, 0.3);
  const cplx z = std::polar(1.0, 2.0 * kPi / 3.0);
  for (int k = 0; k < 3; ++k) {
    cplx total = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        total += std::pow(std::conj(z), -k * a) * std::pow(z, -k * b) *
                 coherent_overlap(g * std::pow(z, a), g * std::pow(z, b));
    EXPECT_NEAR(cat_probability(g, 3, k), total.real() / 9.0, 1e-13);
  }
}

TEST(CatProbability, CompletenessAndWeakCoupling) {
  for (int N : {2, 3, 4, 5}) {
    double sum = 0.0;
    for (int k = 0; k < N; ++k) sum += cat_probability(cplx(1.3, -0.4), N, k);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_NEAR(cat_probability(1e-4, 2, 0), 1.0, 1e-7);
  EXPECT_NEAR(cat_probability(1e-4, 2, 1), 0.0, 1e-7);
}

TEST(Kraus, EvenCatOnVacuum) {
  const int c = coherent_cutoff(kG);
  const PhotonState out = apply_kraus(conditional_kraus(kG, 2, 0, c), vacuum(c));
  EXPECT_NEAR(out.amplitudes.squaredNorm(), 0.52161, 1e-5);
  const CVector cat = make_coherent(kG, c).amplitudes + make_coherent(-kG, c).amplitudes;
  EXPECT_GT(fidelity(out, PhotonState(cat)), 1.0 - 1e-12);
}

TEST(Kraus, FourComponentBranchesComplete) {
  const int c = coherent_cutoff(4.0) + 10;
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    const PhotonState out = apply_kraus(conditional_kraus(4.0, 4, k, c), vacuum(c));
    EXPECT_NEAR(out.amplitudes.squaredNorm(), cat_probability(4.0, 4, k), 1e-10);
    sum += out.amplitudes.squaredNorm();
  }
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(Kraus, CompletenessOnSafeSubspace) {
  for (int N : {2, 3, 4}) {
    const cplx g(1.1, 0.5);
    const int safe = 25;
    const int c = safe_cutoff(safe, std::abs(g));
    CMatrix sum = CMatrix::Zero(c + 1, c + 1);
    for (int k = 0; k < N; ++k) {
      const CMatrix kr = conditional_kraus(g, N, k, c).entries;
      sum += kr.adjoint() * kr;
    }
    const CMatrix err = sum.topLeftCorner(safe, safe) - CMatrix::Identity(safe, safe);
    EXPECT_LT(err.cwiseAbs().maxCoeff(), 1e-10) << N;
  }
}

TEST(Kraus, MatrixFreeMatchesMatrix) {
  const cplx g(0.4, 1.2);
  const int c = 40;
  const PhotonState v = make_coherent(cplx(0.3, -0.2), c);
  const CMatrix real_d = make_displacement(std::abs(g), c).entries;
  for (int k = 0; k < 3; ++k) {
    const CVector a = apply_cat_kraus(real_d, g, 3, k, v.amplitudes);
    const CVector b = conditional_kraus(g, 3, k, c).entries * v.amplitudes;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Residue, Mapping) {
  EXPECT_EQ(cat_order_for_residue(0, 0, 4), 0);
  EXPECT_EQ(cat_order_for_residue(0, 1, 4), 3);
  EXPECT_EQ(cat_order_for_residue(1, 0, 4), 1);
  for (int m = 0; m < 4; ++m)
    for (int k = 0; k < 4; ++k)
      EXPECT_EQ(cat_order_for_residue(m, residue_for_cat_order(m, k, 4), 4), k);
}

TEST(PostSelection, ResidueTwoEqualsParity) {
  for (int n = -7; n <= 7; ++n) {
    EXPECT_EQ(PostSelection::residue(0, 2).selects(n), PostSelection::parity(false).selects(n));
    EXPECT_EQ(PostSelection::residue(1, 2).selects(n), PostSelection::parity(true).selects(n));
  }
}

TEST(Ladder, UniformCombGivesCoherentState) {
  const int c = coherent_cutoff(kG) + 10;
  JointState j = make_joint(ideal_comb(1, 0, 4), vacuum(c), Boundary::kPeriodic);
  scatter_ladder(j, kG);
  const Heralded h = postselect(j, PostSelection::residue(0, 1));
  EXPECT_NEAR(h.probability, 1.0, 1e-10);
  EXPECT_NEAR(h.principal_weight, 1.0, 1e-10);
  EXPECT_GT(fidelity(h.photon_state(), make_coherent(kG, c)), 1.0 - 1e-8);
}

TEST(Ladder, ZeroCouplingIsIdentity) {
  const PhotonState ph = make_coherent(0.5, 20);
  const ElectronComb comb = gaussian_comb(2, 2.0, 12);
  JointState j = make_joint(comb, ph);
  const CMatrix before = j.amplitudes;
  scatter_ladder(j, 0.0);
  EXPECT_EQ((j.amplitudes - before).norm(), 0.0);
}

TEST(Ladder, MatchesFullJointExponential) {
  // Brute force: the joint generator g b a^dagger - h.c. on a finite ladder,
  // exponentiated directly. The comb sits far from the edges.
  const int c = 6;
  const int rows = 41;
  const cplx g(0.7, 0.4);
  const ElectronComb comb = gaussian_comb(1, 1.5, 5);
  const PhotonState ph = make_coherent(cplx(0.2, 0.1), c);
  const int dim = rows * (c + 1);
  const int first = -rows / 2;
  CMatrix gen = CMatrix::Zero(dim, dim);
  auto idx = [&](int r, int n) { return r * (c + 1) + n; };
  for (int r = 1; r < rows; ++r) {
    for (int n = 0; n < c; ++n) {
      // b a^dagger |r, n> = sqrt(n+1) |r-1, n+1>
      const double amp = std::sqrt(n + 1.0);
      gen(idx(r - 1, n + 1), idx(r, n)) += g * amp;
      gen(idx(r, n), idx(r - 1, n + 1)) -= std::conj(g) * amp;
    }
  }
  CVector in = CVector::Zero(dim);
  for (int e = comb.first_index(); e <= comb.last_index(); ++e)
    for (int n = 0; n <= c; ++n) in[idx(e - first, n)] = comb.at(e) * ph.amplitudes[n];
  const CVector brute = expm(gen) * in;

  const JointState j = joint_scatter_ladder(comb, ph, g);
  double err = 0.0;
  for (int r = 0; r < j.rows(); ++r)
    for (int n = 0; n <= c; ++n)
      err = std::max(err, std::abs(j.amplitudes(r, n) - brute[idx(j.first_index + r - first, n)]));
  EXPECT_LT(err, 1e-12);
}

TEST(Ladder, ConservesTotalExcitation) {
  const PhotonState ph = make_coherent(cplx(0.4, 0.9), 40);
  const ElectronComb comb = gaussian_comb(2, 3.0, 24, 5);
  JointState j = make_joint(comb, ph);
  const double before = j.total_excitation();
  scatter_ladder(j, cplx(1.0, 0.6));
  EXPECT_NEAR(j.norm(), 1.0, 1e-10);
  EXPECT_NEAR(j.total_excitation(), before, 1e-10);
  EXPECT_LT(j.ladder_edge_population(1), 1e-20);
}

TEST(Engines, AgreeOnGaussianComb) {
  const int c = coherent_cutoff(kG) + 10;
  const ElectronComb comb = gaussian_comb(2, 4.0, 30);
  const JointState a = joint_scatter_ladder(comb, vacuum(c), kG);
  const JointState b = joint_scatter_fourier(comb, vacuum(c), kG);
  EXPECT_GT(joint_fidelity(a, b), 1.0 - 1e-8);
}

TEST(Engines, AgreeOnPeriodicIdealComb) {
  const cplx g(0.6, 1.5);
  const int c = coherent_cutoff(std::abs(g)) + 10;
  for (int N : {2, 3, 4}) {
    JointState a = make_joint(ideal_comb(N, 1, 6), vacuum(c), Boundary::kPeriodic);
    JointState b = a;
    scatter_ladder(a, g);
    scatter_fourier(b, g);
    EXPECT_GT(joint_fidelity(a, b), 1.0 - 1e-8) << N;
  }
}

TEST(Engines, FourierOnTwoAnglesGivesDisplacedBranches) {
  const int c = coherent_cutoff(kG) + 10;
  JointState j = make_joint(ideal_comb(2, 0, 1), vacuum(c), Boundary::kPeriodic, 2);
  EXPECT_EQ(scatter_fourier(j, kG), 2);
  const Heralded even = postselect(j, PostSelection::parity(false));
  const Heralded odd = postselect(j, PostSelection::parity(true));
  const PhotonState plus = make_coherent(kG, c), minus = make_coherent(-kG, c);
  EXPECT_GT(fidelity(even.photon_state(), PhotonState(plus.amplitudes + minus.amplitudes)),
            1.0 - 1e-10);
  EXPECT_GT(fidelity(odd.photon_state(), PhotonState(plus.amplitudes - minus.amplitudes)),
            1.0 - 1e-10);
}

TEST(Engines, SinglePeakLosesDirectionalCoherence) {
  const double g = 1.2;
  const int c = coherent_cutoff(g) + 10;
  const JointState j = joint_scatter_fourier(single_peak(0, 2), vacuum(c), g);
  const CMatrix rho = j.amplitudes.transpose() * j.amplitudes.conjugate();
  for (int m = 0; m <= 12; ++m) {
    const double poisson = std::exp(-g * g + 2.0 * m * std::log(g) - std::lgamma(m + 1.0));
    EXPECT_NEAR(rho(m, m).real(), poisson, 1e-10);
    for (int n = 0; n < m; ++n) EXPECT_LT(std::abs(rho(m, n)), 1e-10);
  }
}

TEST(PostSelect, EvenCatProbability) {
  const int c = coherent_cutoff(kG) + 10;
  JointState j = make_joint(ideal_comb(2, 0, 8), vacuum(c), Boundary::kPeriodic);
  scatter_ladder(j, kG);
  const Heralded even = postselect(j, PostSelection::parity(false));
  const Heralded odd = postselect(j, PostSelection::parity(true));
  EXPECT_NEAR(even.probability, 0.52161, 1e-5);
  EXPECT_NEAR(even.probability, cat_probability(kG, 2, 0), 1e-12);
  EXPECT_NEAR(even.probability + odd.probability, 1.0, 1e-10);
  const PhotonState kraus = apply_kraus(conditional_kraus(kG, 2, 0, c), vacuum(c));
  EXPECT_GT(fidelity(even.photon_state(), kraus), 1.0 - 1e-12);
}

TEST(PostSelect, CompletePartitionOnGaussianComb) {
  const int c = 30;
  const JointState j = joint_scatter_ladder(gaussian_comb(3, 3.0, 24), make_coherent(0.5, c), 1.1);
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) sum += postselect(j, PostSelection::residue(k, 3)).probability;
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(PostSelect, ZeroBranchThrows) {
  JointState j = make_joint(ideal_comb(2, 0, 4), vacuum(10), Boundary::kPeriodic);
  EXPECT_THROW(postselect(j, PostSelection::parity(true)), ZeroProbabilityError);
}

TEST(PostSelect, WindowedIdealCombConvergesToKraus) {
  const double g = kG;
  const int c = coherent_cutoff(g) + 10;
  const PhotonState kraus = apply_kraus(conditional_kraus(g, 2, 0, c), vacuum(c));
  const int w_needed = 8 * static_cast<int>(std::ceil(g * g + g));
  double prev = 0.0;
  for (int w : {2, 6, w_needed}) {
    const JointState j = joint_scatter_ladder(ideal_comb(2, 0, w), vacuum(c), g);
    const double f = fidelity(postselect(j, PostSelection::exact(0)).photon_state(), kraus);
    EXPECT_GE(f, prev);
    prev = f;
  }
  EXPECT_GT(prev, 1.0 - 1e-6);
}

TEST(PostSelect, EnsembleCompressionKeepsTrace) {
  const JointState j = joint_scatter_ladder(gaussian_comb(2, 2.0, 14), vacuum(20), 1.0);
  const Heralded h = postselect(j, PostSelection::parity(false));
  const auto ens = h.ensemble();
  double total = 0.0;
  for (const auto& [w, v] : ens) {
    total += w;
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_LT(h.principal_weight, 1.0);
  EXPECT_GT(h.principal_weight, 0.5);
}

TEST(TwoMode, ZeroSecondCouplingReducesToSingleMode) {
  const int c = 16;
  const ElectronComb comb = gaussian_comb(2, 2.0, 10);
  const PhotonState ph1 = make_coherent(0.3, c), ph2 = make_coherent(cplx(0.0, 0.5), c);
  const JointState two = two_mode_scatter(comb, ph1, ph2, 0.9, 0.0);
  const JointState one = joint_scatter_ladder(comb, ph1, 0.9);
  ASSERT_EQ(two.rows(), one.rows());
  const int d = c + 1;
  double err = 0.0;
  for (int r = 0; r < one.rows(); ++r)
    for (int n0 = 0; n0 < d; ++n0)
      for (int n1 = 0; n1 < d; ++n1)
        err = std::max(err, std::abs(two.amplitudes(r, n0 * d + n1) -
                                     one.amplitudes(r, n0) * ph2.amplitudes[n1]));
  EXPECT_LT(err, 1e-13);
}

TEST(TwoMode, CombFourBranchesMatchKraus) {
  const int c = 18;
  const cplx g1 = kG, g2(0.5, 0.8);
  JointState j = make_joint(ideal_comb(4, 0, 4), vacuum(c), vacuum(c), Boundary::kPeriodic);
  JointState f = j;
  scatter_ladder(j, g1, 0);
  scatter_ladder(j, g2, 1);
  scatter_fourier_two_mode(f, g1, g2);
  EXPECT_GT(joint_fidelity(j, f), 1.0 - 1e-8);
  CVector vac = CVector::Zero((c + 1) * (c + 1));
  vac[0] = 1.0;
  for (int r = 0; r < 4; ++r) {
    const Heralded h = postselect(j, PostSelection::residue(r, 4));
    const int k = cat_order_for_residue(0, r, 4);
    const CVector expect = apply_two_mode_kraus(g1, g2, 4, k, c, vac);
    EXPECT_NEAR(h.probability, expect.squaredNorm(), 1e-9);
    EXPECT_GT(std::norm(expect.normalized().dot(h.state)), 1.0 - 1e-9);
  }
}
