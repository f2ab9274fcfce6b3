#include <gtest/gtest.h>

#include <cmath>

#include "gkpforge/electron.hpp"

using namespace gkpforge;

TEST(IdealComb, ShiftedSupportIsOdd) {
  const ElectronComb c = ideal_comb(2, 1, 10);
  EXPECT_NEAR(c.amplitudes.norm(), 1.0, 1e-12);
  for (int n = c.first_index(); n <= c.last_index(); ++n) {
    if (((n % 2) + 2) % 2 == 0) EXPECT_EQ(c.at(n), 0.0) << n;
    else EXPECT_GT(std::abs(c.at(n)), 0.0) << n;
  }
}

TEST(IdealComb, InvariantUnderLoweringByN) {
  const int N = 3;
  const ElectronComb c = ideal_comb(N, 0, 30);
  const ElectronComb shifted = lower_ladder(c, N);
  // Away from the window edges b^N maps the comb onto itself.
  for (int n = c.first_index() + N; n <= c.last_index() - N; ++n) {
    EXPECT_EQ(shifted.at(n), c.at(n)) << n;
  }
}

TEST(IdealComb, EqualPhases) {
  const ElectronComb c = ideal_comb(4, 2, 20);
  for (double p : c.peak_phases()) EXPECT_EQ(p, 0.0);
}

TEST(GaussianComb, NormalisedWithResidueSupport) {
  const ElectronComb c = gaussian_comb(3, 5.0, 40, 1);
  EXPECT_NEAR(c.amplitudes.norm(), 1.0, 1e-12);
  for (int n : c.occupied_indices()) EXPECT_EQ(((n - 1) % 3 + 3) % 3, 0);
  EXPECT_TRUE(c.window_converged);
}

TEST(GaussianComb, SpectrumStdIsSigma) {
  const double sigma = 4.0;
  const ElectronComb c = gaussian_comb(2, sigma, 60);
  double mean = 0.0, second = 0.0;
  for (int n = c.first_index(); n <= c.last_index(); ++n) {
    const double w = std::norm(c.at(n));
    mean += n * w;
    second += n * n * w;
  }
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(second - mean * mean), sigma, 1e-6);
}

TEST(GaussianComb, NarrowWindowIsFlagged) {
  const ElectronComb c = gaussian_comb(2, 8.0, 10);
  EXPECT_FALSE(c.window_converged);
  EXPECT_GT(c.truncated_weight, 1e-3);
}

TEST(GaussianComb, FlatLimitApproachesIdeal) {
  const ElectronComb ideal = ideal_comb(2, 0, 20);
  double last = 0.0;
  for (double sigma : {5.0, 50.0, 5000.0}) {
    const ElectronComb g = gaussian_comb(2, sigma, 20);
    const double f = std::norm(ideal.amplitudes.dot(g.amplitudes));
    EXPECT_GT(f, last);
    last = f;
  }
  EXPECT_GT(last, 1.0 - 1e-9);
}

TEST(PhaseProfile, ZeroDistanceLeavesCombUnchanged) {
  const ElectronComb c = gaussian_comb(2, 3.0, 20);
  const ElectronComb out = apply_phase_profile(c, quadratic_profile(0.7, 0.0, -20, 41));
  EXPECT_EQ((out.amplitudes - c.amplitudes).norm(), 0.0);
}

TEST(PhaseProfile, QuadraticLawAndSpectrum) {
  const double beta = 0.013, z = 2.5;
  const PhaseProfile p = quadratic_profile(beta, z, -10, 21);
  for (int i = 0; i < 21; ++i) {
    const double n = -10 + i;
    EXPECT_EQ(p.phases[i], -beta * n * n * z);
  }
  const ElectronComb c = gaussian_comb(2, 3.0, 10);
  const ElectronComb out = apply_phase_profile(c, p);
  for (int n = c.first_index(); n <= c.last_index(); ++n) {
    EXPECT_NEAR(std::norm(out.at(n)), std::norm(c.at(n)), 1e-15);
  }
}

TEST(PhaseProfile, ShortProfileThrows) {
  const ElectronComb c = ideal_comb(2, 0, 10);
  EXPECT_THROW(apply_phase_profile(c, explicit_profile(-2, {0.0, 0.0, 0.0, 0.0, 0.0})), Error);
}

TEST(Dispersion, MatchesMomentumRoute) {
  // Independent route: d^2E/dp^2 = 1/(gamma^3 m), with p expanded around p0
  // by one photon momentum hbar omega / v.
  const DispersionParams params;
  const double hbar = 1.054571817e-34, me = 9.1093837015e-31, c = 299792458.0,
               q = 1.602176634e-19;
  const double energy = params.kinetic_energy_ev * q + me * c * c;
  const double p0 = std::sqrt(energy * energy - me * me * c * c * c * c) / c;
  const double v = p0 * c * c / energy;
  const double gamma = energy / (me * c * c);
  const double omega = params.photon_energy_ev * q / hbar;
  const double dk = omega / v;  // wavenumber step per ladder index
  // Phase per index^2 per metre: hbar dk^2 / (2 gamma^3 m) divided by v.
  const double expected = hbar * dk * dk / (2.0 * gamma * gamma * gamma * me) / v;
  EXPECT_NEAR(dispersion_beta(params) / expected, 1.0, 1e-9);
}

TEST(Fourier, SinglePeakHasFlatModulus) {
  const CVector psi = fourier_profile(single_peak(7, 5), 64);
  for (Eigen::Index j = 0; j < psi.size(); ++j) EXPECT_NEAR(std::abs(psi[j]), 1.0, 1e-14);
}

TEST(Fourier, IdealCombConcentratesOnNAngles) {
  // 7 peaks at spacing 4 sampled at 28 angles: weight only at j = 0, 7, 14, 21.
  ElectronComb c = ideal_comb(4, 0, 15);
  const CVector psi = fourier_profile(c, 28);
  for (int j = 0; j < 28; ++j) {
    if (j % 7 == 0) EXPECT_GT(std::abs(psi[j]), 1.0);
    else EXPECT_LT(std::abs(psi[j]), 1e-12) << j;
  }
}

TEST(Fourier, GaussianCombPeakShape) {
  const double sigma = 6.0;
  const ElectronComb c = gaussian_comb(2, sigma, 80);
  const int M = 4096;
  const CVector psi = fourier_profile(c, M);
  for (int j : {1, 10, 25, 40}) {
    const double theta = 2.0 * kPi * j / M;
    EXPECT_NEAR(std::abs(psi[j] / psi[0]), std::exp(-sigma * sigma * theta * theta), 1e-9);
    // The second peak at theta = pi has the same shape.
    EXPECT_NEAR(std::abs(psi[M / 2 + j] / psi[0]), std::exp(-sigma * sigma * theta * theta), 1e-9);
  }
}

TEST(Fourier, ParsevalAndRoundTrip) {
  ElectronComb c = gaussian_comb(3, 4.0, 30, 2);
  c = apply_phase_profile(c, quadratic_profile(0.05, 1.0, c.first_index(), c.size()));
  const int M = 4 * c.size();
  const CVector psi = fourier_profile(c, M);
  EXPECT_NEAR(psi.squaredNorm() / M, 1.0, 1e-12);
  const CVector back = inverse_fourier_profile(psi, c.first_index(), c.size());
  EXPECT_LT((back - c.amplitudes).cwiseAbs().maxCoeff(), 1e-12);
}
