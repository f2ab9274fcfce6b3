#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gkpforge/fock.hpp"

using namespace gkpforge;

namespace {

const double kSqrtPiOver2 = std::sqrt(kPi / 2.0);

PhotonState random_low_state(int support, int cutoff, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  CVector v = CVector::Zero(cutoff + 1);
  for (int n = 0; n < support; ++n) v[n] = cplx(dist(rng), dist(rng));
  return PhotonState(v / v.norm());
}

// Brute-force <alpha|beta> by summing Fock amplitudes term by term.
cplx brute_overlap(cplx a, cplx b, int terms) {
  cplx acc = 0.0;
  double lf = 0.0;
  for (int n = 0; n < terms; ++n) {
    if (n > 0) lf += std::log(static_cast<double>(n));
    acc += std::exp(-0.5 * (std::norm(a) + std::norm(b)) - lf) *
           std::pow(std::conj(a), n) * std::pow(b, n);
  }
  return acc;
}

}  // namespace

TEST(Coherent, VacuumAtZero) {
  const PhotonState s = make_coherent(0.0, 10);
  EXPECT_DOUBLE_EQ(s.amplitudes[0].real(), 1.0);
  EXPECT_NEAR(s.amplitudes.tail(10).norm(), 0.0, 1e-15);
}

TEST(Coherent, MeanPhotonNumber) {
  const PhotonState s = make_coherent(2.0, coherent_cutoff(2.0));
  EXPECT_TRUE(s.converged());
  EXPECT_NEAR(s.mean_photon_number(), 4.0, 1e-10);
}

TEST(Coherent, OppositeOverlap) {
  const double g = kSqrtPiOver2;
  const int c = coherent_cutoff(g);
  const cplx numeric = overlap(make_coherent(g, c), make_coherent(-g, c));
  EXPECT_NEAR(numeric.real(), brute_overlap(g, -g, 80).real(), 1e-12);
  EXPECT_NEAR(numeric.real(), std::exp(-kPi), 1e-10);
  EXPECT_NEAR(numeric.real(), 0.04322, 1e-5);
}

TEST(Coherent, SmallCutoffFlagsLeak) {
  EXPECT_FALSE(make_coherent(3.0, 5).converged());
}

TEST(Displacement, ZeroIsIdentity) {
  const CMatrix d = make_displacement(0.0, 12).entries;
  EXPECT_NEAR((d - CMatrix::Identity(13, 13)).norm(), 0.0, 1e-15);
}

TEST(Displacement, OnVacuumMatchesCoherent) {
  for (cplx alpha : {cplx(1.3, 0.0), cplx(-0.4, 2.1), cplx(0.0, 3.5)}) {
    const int c = coherent_cutoff(std::abs(alpha)) + 20;
    const PhotonState shifted = make_displacement(alpha, c).apply(vacuum(c));
    EXPECT_GT(fidelity(shifted, make_coherent(alpha, c)), 1.0 - 1e-10);
  }
}

TEST(Displacement, ClosedFormMatchesExpm) {
  for (cplx alpha : {cplx(0.7, 0.2), cplx(-2.0, 1.0), cplx(0.0, -4.0)}) {
    const int safe = 20;
    const int c = safe_cutoff(safe, std::abs(alpha));
    const CMatrix a = make_displacement(alpha, c).entries;
    const CMatrix b = make_displacement_expm(alpha, c).entries;
    const double err = (a.leftCols(safe) - b.leftCols(safe)).topRows(safe).cwiseAbs().maxCoeff();
    EXPECT_LT(err, 1e-9) << alpha;
  }
}

TEST(Displacement, InversePair) {
  const cplx alpha(1.1, -0.6);
  const int safe = 30;
  const int c = safe_cutoff(safe, std::abs(alpha));
  const CMatrix prod = make_displacement(alpha, c).entries * make_displacement(-alpha, c).entries;
  const CMatrix id = CMatrix::Identity(c + 1, c + 1);
  EXPECT_LT((prod - id).topLeftCorner(safe, safe).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Displacement, UnitaryOnSafeSubspace) {
  const cplx alpha(2.2, 1.4);
  const int support = 25;
  const int c = safe_cutoff(support, std::abs(alpha));
  const PhotonState psi = random_low_state(support + 1, c, 7);
  const double ratio = make_displacement(alpha, c).apply(psi).norm() / psi.norm();
  EXPECT_NEAR(ratio, 1.0, 1e-10);
}

TEST(Displacement, Composition) {
  const cplx a(0.8, 0.3), b(-0.2, 1.1);
  const int c = 80;
  const CMatrix lhs = make_displacement(a, c).entries * make_displacement(b, c).entries;
  const cplx phase = std::polar(1.0, std::imag(a * std::conj(b)));
  const CMatrix rhs = phase * make_displacement(a + b, c).entries;
  EXPECT_LT((lhs - rhs).leftCols(20).topRows(40).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Displacement, RotationMatchesDirect) {
  const double mag = 1.7;
  const int c = 50;
  const CMatrix base = make_displacement(mag, c).entries;
  for (double phi : {0.4, 2.0 * kPi / 3.0, -1.3}) {
    const CMatrix direct = make_displacement(std::polar(mag, phi), c).entries;
    EXPECT_LT((rotate_displacement(base, phi) - direct).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Displacement, LargeCutoffStaysFinite) {
  const CMatrix d = make_displacement(cplx(6.0, 2.0), 1000).entries;
  EXPECT_TRUE(d.allFinite());
  const PhotonState s = make_displacement(cplx(6.0, 2.0), 1000).apply(vacuum(1000));
  EXPECT_NEAR(s.norm(), 1.0, 1e-10);
}

TEST(Displacement, ShiftsXMeanBySqrt2Alpha) {
  const double alpha = 1.9;
  const int c = 80;
  const PhotonState s = make_displacement(alpha, c).apply(vacuum(c));
  EXPECT_NEAR(quadrature_mean(s, 0.0), std::sqrt(2.0) * alpha, 1e-8);
  EXPECT_NEAR(quadrature_variance(s, 0.0), 0.5, 1e-8);
}

TEST(Squeeze, ZeroIsIdentity) {
  const CMatrix s = make_squeeze({0.0, 0.0}, 20).entries;
  EXPECT_NEAR((s - CMatrix::Identity(21, 21)).norm(), 0.0, 1e-15);
}

TEST(Squeeze, TenDecibelsOnX) {
  const SqueezeParams p{1.1513, 0.0};
  const int c = static_cast<int>(std::ceil(10.0 * std::exp(2.0 * p.r))) + 40;
  const PhotonState s = make_squeeze(p, c).apply(vacuum(c));
  const double var = quadrature_variance(s, 0.0);
  EXPECT_NEAR(var, 0.5 * std::exp(-2.0 * p.r), 1e-8);
  EXPECT_NEAR(10.0 * std::log10(0.5 / var), 10.0, 0.01);
  EXPECT_NEAR(quadrature_variance(s, kPi / 2.0), 0.5 * std::exp(2.0 * p.r), 1e-6);
}

TEST(Squeeze, ExpmMatchesClosedForm) {
  const SqueezeParams p{0.9, 0.7};
  const int c = 120;
  const PhotonState a = make_squeeze(p, c).apply(vacuum(c));
  const PhotonState b = make_squeezed_vacuum(p, c);
  EXPECT_TRUE(b.converged());
  EXPECT_LT((a.amplitudes - b.amplitudes).head(60).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Squeeze, EvenSupportOnly) {
  const int c = 80;
  const PhotonState s = make_squeeze({1.0, 0.3}, c).apply(vacuum(c));
  for (int n = 1; n <= c; n += 2) EXPECT_LT(std::abs(s.amplitudes[n]), 1e-14);
}

TEST(Squeeze, UnitaryOnSafeSubspace) {
  const SqueezeParams p{0.6, 1.0};
  const int c = 100;
  const int buffer =
      static_cast<int>(std::ceil(c * (1.0 - std::exp(-2.0 * p.r)) / 2.0 + 10));
  const PhotonState psi = random_low_state(c - buffer - 20, c, 3);
  EXPECT_NEAR(make_squeeze(p, c).apply(psi).norm(), 1.0, 1e-10);
}

TEST(Squeeze, ParamsReconstructXi) {
  const SqueezeParams p{0.8, 2.5};
  EXPECT_EQ(p.xi(), std::polar(0.8, 2.5));
}

TEST(Expm, MatchesDiagonalExponent) {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = cplx(0.0, 5.0);
  d(1, 1) = -3.0;
  d(2, 2) = cplx(1.0, -2.0);
  const CMatrix e = expm(d);
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(e(i, i) - std::exp(d(i, i))), 1e-12);
}

TEST(Fidelity, Basic) {
  const PhotonState s = random_low_state(8, 10, 11);
  EXPECT_NEAR(fidelity(s, s), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(vacuum(5), fock_state(1, 5)), 0.0, 1e-15);
  const cplx alpha(0.9, -0.5);
  const int c = coherent_cutoff(std::abs(alpha));
  EXPECT_NEAR(fidelity(vacuum(c), make_coherent(alpha, c)), std::exp(-std::norm(alpha)), 1e-10);
}

TEST(Fidelity, EmbedsSmallerCutoff) {
  EXPECT_NEAR(fidelity(vacuum(3), make_coherent(0.5, 40)), std::exp(-0.25), 1e-12);
}

TEST(Fidelity, ZeroNormThrows) {
  PhotonState z(CVector::Zero(4));
  EXPECT_THROW(fidelity(z, vacuum(3)), ZeroNormError);
}

TEST(Hermite, VacuumAndOddAtOrigin) {
  const std::vector<double> grid{0.0};
  EXPECT_NEAR(quadrature_wavefunction(vacuum(4), 0.0, grid)[0].real(), std::pow(kPi, -0.25), 1e-14);
  EXPECT_NEAR(std::abs(quadrature_wavefunction(fock_state(1, 4), 0.0, grid)[0]), 0.0, 1e-15);
}

TEST(Hermite, HighOrderNormalisation) {
  // Riemann sum of h_n^2 over a wide grid should be 1 even for n ~ 900.
  const int n = 900;
  const double dx = 0.01;
  double total = 0.0;
  for (double x = -48.0; x <= 48.0; x += dx) {
    const double h = hermite_functions(n, x)[n];
    total += h * h * dx;
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Quadrature, CoherentIsShiftedGaussian) {
  const double alpha = 1.5;
  const PhotonState s = make_coherent(alpha, 60);
  std::vector<double> grid;
  for (double x = -3.0; x <= 6.0; x += 0.25) grid.push_back(x);
  const auto psi = quadrature_wavefunction(s, 0.0, grid);
  const double mu = std::sqrt(2.0) * alpha;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = std::exp(-(grid[i] - mu) * (grid[i] - mu)) / std::sqrt(kPi);
    EXPECT_NEAR(std::norm(psi[i]), expected, 1e-10);
  }
}

TEST(Quadrature, PAngleOfRealCoherentIsCentred) {
  const PhotonState s = make_coherent(1.2, 40);
  EXPECT_NEAR(quadrature_mean(s, kPi / 2.0), 0.0, 1e-12);
  EXPECT_NEAR(quadrature_mean(make_coherent(cplx(0.0, 1.2), 40), kPi / 2.0),
              std::sqrt(2.0) * 1.2, 1e-10);
}

TEST(Wigner, OriginValues) {
  EXPECT_NEAR(wigner_at(vacuum(6), 0.0, 0.0), 1.0 / kPi, 1e-14);
  EXPECT_NEAR(wigner_at(fock_state(1, 6), 0.0, 0.0), -1.0 / kPi, 1e-14);
}

TEST(Wigner, OddCatNegativeAtOrigin) {
  const double g = kSqrtPiOver2;
  const int c = coherent_cutoff(g);
  const CVector odd = make_coherent(g, c).amplitudes - make_coherent(-g, c).amplitudes;
  EXPECT_LT(wigner_at(PhotonState(odd), 0.0, 0.0), -0.3);
}

TEST(Wigner, ParityIdentity) {
  const PhotonState s = random_low_state(15, 20, 5);
  double parity = 0.0;
  for (int n = 0; n <= s.cutoff(); ++n) parity += (n % 2 ? -1.0 : 1.0) * std::norm(s.amplitudes[n]);
  EXPECT_NEAR(kPi * wigner_at(s, 0.0, 0.0), parity, 1e-8);
}

TEST(Wigner, CoherentIsDisplacedGaussian) {
  const cplx alpha(1.0, -0.5);
  const PhotonState s = make_coherent(alpha, 40);
  const double x0 = std::sqrt(2.0) * alpha.real();
  const double p0 = std::sqrt(2.0) * alpha.imag();
  for (double x : {-1.0, 0.3, 1.4, 4.0}) {
    for (double p : {-2.0, -0.7, 0.5}) {
      const double expected = std::exp(-(x - x0) * (x - x0) - (p - p0) * (p - p0)) / kPi;
      EXPECT_NEAR(wigner_at(s, x, p), expected, 1e-10);
    }
  }
}

TEST(Wigner, GridIntegratesToOneAndMarginalMatches) {
  const int c = 12;
  const PhotonState s = random_low_state(8, c, 21);
  const double extent = std::sqrt(2.0 * c) + 3.0;
  const int n = static_cast<int>(std::ceil(2 * extent / 0.05)) + 1;
  GridSpec spec{-extent, extent, -extent, extent, n, n};
  const WignerGrid w = wigner(s, spec);
  EXPECT_NEAR(w.integral(), 1.0, 1e-3);

  const auto psi = quadrature_wavefunction(s, 0.0, w.x);
  const Eigen::RowVectorXd marginal = w.values.colwise().sum() * spec.dp();
  for (int j = 0; j < n; j += 17) {
    EXPECT_NEAR(marginal[j], std::norm(psi[j]), 1e-4) << w.x[j];
  }
}
