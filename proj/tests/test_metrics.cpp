#include <gtest/gtest.h>

#include <cmath>

#include "gkpforge/metrics.hpp"

using namespace gkpforge;

namespace {
const double kRootPi = std::sqrt(kPi);
}

TEST(Squeezing, VacuumAndSqueezedVacuum) {
  EXPECT_NEAR(squeezing_db_peaks(vacuum(20), 0.0), 0.0, 1e-3);
  const PhotonState s = make_squeezed_vacuum({1.1513, 0.0}, 200);
  // Analytic: Var = e^{-2r}/2.
  EXPECT_NEAR(squeezing_db_peaks(s, 0.0), 10.0 * std::log10(std::exp(2.0 * 1.1513)), 0.05);
  EXPECT_NEAR(squeezing_db_peaks(s, kPi / 2.0), -10.0 * std::log10(std::exp(2.0 * 1.1513)), 0.05);
}

TEST(Squeezing, ClosedFormLaws) {
  EXPECT_NEAR(squeezing_db_vacuum_scheme(3), 10.0 * std::log10(1.0 + 3.0 * kPi), 1e-12);
  EXPECT_NEAR(squeezing_db_vacuum_scheme(0), 0.0, 1e-12);
  EXPECT_NEAR(squeezing_db_seeded(3, 1.1513), 9.79, 0.01);
}

TEST(Squeezing, RowTwoFollowsLaw) {
  for (int m = 1; m <= 4; ++m) {
    const Outcome o = run_protocol(table1_preset(2, m));
    EXPECT_NEAR(squeezing_db_peaks(o.state(), 0.0), squeezing_db_vacuum_scheme(m), 0.5) << m;
  }
}

TEST(CatReference, ParityOrthogonalityAndLimits) {
  const PhotonState odd = make_cat_reference(2, 1, 1.3, 40);
  for (int n = 0; n <= 40; n += 2) EXPECT_LT(std::abs(odd.amplitudes[n]), 1e-14);
  std::vector<PhotonState> four;
  for (int k = 0; k < 4; ++k) four.push_back(make_cat_reference(4, k, 4.0, 60));
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) EXPECT_LT(std::abs(overlap(four[i], four[j])), 1e-10);
  }
  EXPECT_GT(fidelity(make_cat_reference(2, 0, 1e-3, 10), vacuum(10)), 1.0 - 1e-6);
  EXPECT_THROW(make_cat_reference(2, 1, 0.0, 10), ZeroNormError);
}

TEST(SquareGkp, PeakPositionsAndWidth) {
  const double delta = std::pow(10.0, -0.5);
  const int c = 250;
  const PeakFit zero = squeezing_peaks(square_gkp(0.0, delta, c), 0.0);
  for (double x : zero.centers) {
    EXPECT_NEAR(std::remainder(x, 2.0 * kRootPi), 0.0, 0.01) << x;
  }
  EXPECT_NEAR(zero.db, 10.0, 0.1);
  const PeakFit one = squeezing_peaks(square_gkp(1.0, delta, c), 0.0);
  for (double x : one.centers) {
    EXPECT_NEAR(std::remainder(x - kRootPi, 2.0 * kRootPi), 0.0, 0.01) << x;
  }
  GKPReference plus = GKPReference::parse("square:+");
  plus.delta = delta;
  const PeakFit p = squeezing_peaks(make_gkp_reference(plus, c), kPi / 2.0);
  // The Gaussian envelope pulls finite-energy p-peaks towards the origin by
  // about delta^4 times their position.
  for (double x : p.centers) EXPECT_NEAR(std::remainder(x, 2.0 * kRootPi), 0.0, 0.05) << x;
}

TEST(SquareGkp, MatchesDisplacedSqueezedSum) {
  // Oracle: sum_u w_u D(u sqrt(pi/2)) S(-ln delta)|0> with dense displacements.
  const double delta = 0.35;
  const int c = 200, big = 400;
  const CVector seed = make_squeezed_vacuum({-std::log(delta), 0.0}, big).amplitudes;
  for (double mu : {0.0, 1.0, 0.4}) {
    CVector sum = CVector::Zero(big + 1);
    for (int j = -6; j <= 6; ++j) {
      const double u = 2.0 * j + mu;
      sum += std::exp(-delta * delta * kPi * u * u / 2.0) *
             (make_displacement(u * std::sqrt(kPi / 2.0), big).entries * seed);
    }
    const PhotonState oracle(sum.head(c + 1));
    const PhotonState s = square_gkp(mu, delta, c);
    EXPECT_GT(fidelity(s, oracle), 1.0 - 1e-10) << mu;
    EXPECT_NEAR(s.norm_leak, 1.0 - sum.head(c + 1).squaredNorm() / sum.squaredNorm(), 1e-9) << mu;
  }
}

TEST(SquareGkp, PlusIsRotatedZero) {
  // Holds up to envelope asymmetry of order delta^4.
  const int c = 300;
  const double delta = 0.2;
  GKPReference plus = GKPReference::parse("square:+");
  plus.delta = delta;
  const PhotonState zero = square_gkp(0.0, delta, c);
  // R(-pi/2) maps p-structure onto x: |+> has x-peaks where |0> has p-peaks.
  const PhotonState rotated(zero.amplitudes.cwiseProduct(rotation_phases(kPi / 2.0, c)));
  EXPECT_GT(fidelity(rotated, make_gkp_reference(plus, c)), 0.999);
}

TEST(References, LabelsRoundTrip) {
  for (const char* l : {"square:0", "square:1", "square:+", "square:-", "square:H", "hex:0", "hex:T"}) {
    EXPECT_EQ(GKPReference::parse(l).label(), l);
  }
  EXPECT_EQ(GKPReference::parse("hex:T").construction, Construction::kProtocolLimit);
  EXPECT_EQ(GKPReference::parse("square:0").construction, Construction::kEnvelopeComb);
  EXPECT_EQ(GKPReference::parse("square:0:limit").construction, Construction::kProtocolLimit);
  EXPECT_THROW(GKPReference::parse("square:Q"), ConfigError);
  EXPECT_THROW(GKPReference::parse("hex:0:envelope"), ConfigError);
  EXPECT_THROW(GKPReference::parse("nothing"), ConfigError);
}

TEST(Fidelity, RecoversReferenceDelta) {
  const PhotonState s = square_gkp(0.0, 0.27, 300);
  const FidelityEntry f = best_fidelity(s, GKPReference::parse("square:0"));
  EXPECT_NEAR(f.value, 1.0, 1e-9);
  ASSERT_TRUE(f.delta.has_value());
  EXPECT_NEAR(*f.delta, 0.27, 1e-3);
}

TEST(Fidelity, ProtocolLimitAgreesWithEnvelope) {
  const PhotonState limit = make_gkp_reference(GKPReference::parse("square:0:limit"), 600);
  EXPECT_LT(limit.norm_leak, 1e-8);
  EXPECT_GT(best_fidelity(limit, GKPReference::parse("square:0")).value, 0.99);
}

TEST(Fidelity, RowTwoParityPicksCodeword) {
  for (int m : {2, 3}) {
    const Outcome o = run_protocol(table1_preset(2, m));
    const double f0 = best_fidelity(o, GKPReference::parse("square:0")).value;
    const double f1 = best_fidelity(o, GKPReference::parse("square:1")).value;
    if (m % 2 == 0) EXPECT_GT(f0, f1);
    else EXPECT_GT(f1, f0);
  }
}

TEST(Fidelity, UnimodalInDelta) {
  for (int m = 1; m <= 4; ++m) {
    const PhotonState s = run_protocol(table1_preset(2, m)).state();
    const GKPReference ref = GKPReference::parse(m % 2 == 0 ? "square:0" : "square:1");
    std::vector<double> f;
    for (int i = 0; i <= 40; ++i) {
      GKPReference r = ref;
      r.delta = 0.05 * std::pow(20.0, i / 40.0);
      f.push_back(fidelity(s, make_gkp_reference(r, s.cutoff())));
    }
    int turns = 0;
    for (std::size_t i = 2; i < f.size(); ++i) {
      if ((f[i] - f[i - 1]) * (f[i - 1] - f[i - 2]) < 0) ++turns;
    }
    EXPECT_LE(turns, 1) << m;
  }
}

TEST(Bell, ReferencesAreRecognised) {
  const int c = 200;
  const double delta = 0.3;
  const CVector z = square_gkp(0.0, delta, c).amplitudes, o = square_gkp(1.0, delta, c).amplitudes;
  auto product = [&](const CVector& a, const CVector& b) {
    CVector out((c + 1) * (c + 1));
    for (int n0 = 0; n0 <= c; ++n0) out.segment(n0 * (c + 1), c + 1) = a[n0] * b;
    return out;
  };
  const CVector psi = (product(z, o) - product(o, z)).normalized();
  const auto f = bell_fidelities(psi, c, delta);
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[3].label, "|01>-|10>");
  EXPECT_NEAR(f[3].value, 1.0, 1e-8);
  for (int i = 0; i < 3; ++i) EXPECT_LT(f[i].value, 0.01) << f[i].label;
}

TEST(Jitter, ZeroSpreadAndDeterminism) {
  const Protocol p = cat_preset(2, std::sqrt(kPi / 2.0), 0);
  const JitterResult none = jitter_robustness(p, 0.0, 5, 7);
  EXPECT_NEAR(none.mean, 1.0, 1e-12);
  EXPECT_NEAR(none.stddev, 0.0, 1e-12);
  const JitterResult a = jitter_robustness(p, 0.2, 20, 42), b = jitter_robustness(p, 0.2, 20, 42);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_LT(a.mean, 1.0);
}

TEST(Jitter, QuadraticFitOnExactData) {
  std::vector<double> x, y;
  for (int i = 0; i <= 5; ++i) {
    x.push_back(0.05 * i);
    y.push_back(0.99 - 2.0 * x.back() * x.back());
  }
  const QuadraticFit f = fit_quadratic_loss(x, y);
  EXPECT_NEAR(f.intercept, 0.99, 1e-12);
  EXPECT_NEAR(f.coefficient, 2.0, 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FiniteComb, WiderEnvelopeIsCloserToIdeal) {
  const cplx g = std::sqrt(kPi / 2.0);
  const CombFidelity narrow = finite_comb_cat_fidelity(2.0, g), wide = finite_comb_cat_fidelity(8.0, g);
  EXPECT_GT(wide.fidelity, narrow.fidelity);
  EXPECT_GT(wide.fidelity, 0.99);
  EXPECT_GT(wide.probability, 0.9 * cat_probability(g, 2, 0));
}

TEST(FiniteComb, WidthAndDispersion) {
  const Protocol p = table1_preset(3, 1);
  const double f6 = comb_width_fidelity(p, 6.0), f12 = comb_width_fidelity(p, 12.0);
  EXPECT_GT(f12, f6);
  EXPECT_LE(f12, 1.0);
  EXPECT_NEAR(dispersion_fidelity(p, 6.0, 0.01, 0.0), f6, 1e-12);
  EXPECT_LT(dispersion_fidelity(p, 6.0, 0.01, 1.0), f6);
}

TEST(Bundle, FidelitiesInRangeAndAxes) {
  const Protocol p = table1_preset(7, 1);
  const MetricsBundle b = evaluate_metrics(run_protocol(p), p);
  EXPECT_EQ(squeezing_axes(p).size(), 3u);
  for (const auto& f : b.fidelities) {
    EXPECT_GE(f.value, 0.0);
    EXPECT_LE(f.value, 1.0);
  }
  for (const auto& [axis, db] : b.squeezing_db) EXPECT_TRUE(std::isfinite(db));
  const Protocol cat = cat_preset(2, 2.0, 0);
  const MetricsBundle bc = evaluate_metrics(run_protocol(cat), cat);
  ASSERT_FALSE(bc.fidelities.empty());
  EXPECT_NEAR(bc.fidelities[0].value, 1.0, 1e-10);
}
