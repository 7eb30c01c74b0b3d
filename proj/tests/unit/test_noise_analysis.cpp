#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mz/noise_analysis.hpp"
#include "mz/rng.hpp"

namespace {

using mz::SeriesEnsemble;

SeriesEnsemble constant_ensemble(double c, std::size_t n, std::size_t len) {
  SeriesEnsemble z(n, len);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z.series(i)) v = c;
  }
  return z;
}

TEST(EnsembleCovariance, ConstantSeries) {
  const auto curve = mz::ensemble_covariance(constant_ensemble(0.3, 10, 50), 0.05, 40);
  ASSERT_EQ(curve.c.size(), 41u);
  for (std::size_t l = 0; l <= 40; ++l) {
    EXPECT_NEAR(curve.c[l], 0.09, 1e-15);
    EXPECT_NEAR(curve.c_star[l], 0.09, 1e-15);
  }
  EXPECT_EQ(curve.n_samples, 10u);
}

TEST(EnsembleCovariance, RandomPhaseCosineMatchesQuadrature) {
  // Equispaced phases are the quadrature rule for the uniform phase law;
  // for N > 2 the average of cos(th) cos(tau + th) is exactly cos(tau) / 2.
  const std::size_t n = 720;
  const double k = 0.05;
  const std::size_t len = 201;
  SeriesEnsemble z(n, len);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    auto s = z.series(i);
    for (std::size_t j = 0; j < len; ++j) s[j] = std::cos(k * j + theta);
  }
  const auto curve = mz::ensemble_covariance(z, k, 200);
  for (std::size_t l = 0; l <= 200; ++l) {
    EXPECT_NEAR(curve.c[l], 0.5 * std::cos(k * l), 1e-12);
  }
}

TEST(EnsembleCovariance, RandomPhaseCosineMonteCarlo) {
  mz::RngStream rng(5, 5);
  const std::size_t n = 20000;
  SeriesEnsemble z(n, 101);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    auto s = z.series(i);
    for (std::size_t j = 0; j < 101; ++j) s[j] = std::cos(0.1 * j + theta);
  }
  const auto curve = mz::ensemble_covariance(z, 0.1, 100);
  // Var of cos(th) cos(tau + th) is at most 1/4; 3 standard errors.
  const double tol = 3.0 * 0.5 / std::sqrt(static_cast<double>(n));
  for (std::size_t l = 0; l <= 100; l += 10) {
    EXPECT_NEAR(curve.c[l], 0.5 * std::cos(0.1 * l), tol);
  }
}

TEST(EnsembleCovariance, TimeAverageVariant) {
  const auto z = constant_ensemble(-2.0, 3, 20);
  const auto curve = mz::ensemble_covariance(z, 0.1, 10, mz::CovarianceEstimator::time_average);
  for (double c : curve.c) EXPECT_DOUBLE_EQ(c, 4.0);
}

TEST(EnsembleCovariance, Errors) {
  EXPECT_THROW(mz::ensemble_covariance(SeriesEnsemble{}, 0.05, 0), std::invalid_argument);
  EXPECT_THROW(mz::ensemble_covariance(constant_ensemble(1.0, 2, 5), 0.05, 5),
               std::invalid_argument);
}

TEST(IntegratedCovariance, Examples) {
  const std::vector<double> c(30, 0.7);
  for (double v : mz::integrated_covariance(c, 0.05)) EXPECT_NEAR(v, 0.7, 1e-15);

  // c(s) = s on [0, 1]: the trapezoid rule is exact and C*(1) = 1/2.
  std::vector<double> ramp(11);
  for (std::size_t l = 0; l < ramp.size(); ++l) ramp[l] = 0.1 * l;
  const auto cs = mz::integrated_covariance(ramp, 0.1);
  EXPECT_NEAR(cs.back(), 0.5, 1e-15);
  EXPECT_EQ(cs.front(), ramp.front());
  EXPECT_THROW(mz::integrated_covariance(std::vector<double>{}, 0.1), std::invalid_argument);
}

TEST(Persistence, Examples) {
  const std::vector<double> c(401, -0.4);
  const auto s = mz::persistence_parameter(c, 0.05, 20.0, 12);
  EXPECT_NEAR(s.a, 0.16, 1e-14);
  EXPECT_EQ(s.trajectory_id, 12u);
  EXPECT_FALSE(s.clipped());

  // z(t) = cos(t + th): the integral of cos is bounded by 2, so |a| <= 2/H.
  for (double theta : {0.0, 0.4, 1.3, 2.9, 4.4}) {
    std::vector<double> z(4001);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = std::cos(0.05 * j + theta);
    const auto p = mz::persistence_parameter(z, 0.05, 200.0);
    EXPECT_LE(std::abs(p.raw), 2.0 / 200.0 + 1e-6);
    EXPECT_GE(p.a, 0.0);
  }
}

TEST(Persistence, NegativeClipped) {
  std::vector<double> z(21, 1.0);
  z[0] = -1.0;
  const auto s = mz::persistence_parameter(z, 0.5, 10.0);
  EXPECT_LT(s.raw, 0.0);
  EXPECT_TRUE(s.clipped());
  EXPECT_EQ(s.a, 0.0);
}

TEST(Persistence, HorizonBeyondSpan) {
  const std::vector<double> z(10, 1.0);
  EXPECT_THROW(mz::persistence_parameter(z, 0.05, 20.0), std::invalid_argument);
}

TEST(Decompose, RoundTrip) {
  mz::CovarianceCurve curve;
  curve.lag_step = 0.05;
  curve.c = {0.1967, 0.1953, 0.1917, 0.1860, 0.1782};
  curve.c_star = mz::integrated_covariance(curve.c, 0.05);
  curve.beta = curve.c;

  const auto zero = mz::decompose(curve, 0.0);
  EXPECT_EQ(zero.beta, curve.c);

  const auto split = mz::decompose(curve, 0.0959);
  EXPECT_EQ(split.a_const, 0.0959);
  for (std::size_t l = 0; l < curve.c.size(); ++l) {
    EXPECT_EQ(split.beta[l], curve.c[l] - 0.0959);
    EXPECT_DOUBLE_EQ(split.beta[l] + split.a_const, curve.c[l]);
  }
  EXPECT_NEAR(split.beta[0], 0.1008, 1e-12);
  EXPECT_THROW(mz::decompose(curve, NAN), std::invalid_argument);
}

TEST(FirstZero, Examples) {
  const std::vector<double> beta{0.1, 0.05, -0.02};
  const auto z = mz::first_zero(beta, 0.05);
  EXPECT_TRUE(z.crossed);
  EXPECT_NEAR(z.tau0, 0.05 + 0.05 * (0.05 / 0.07), 1e-15);
  EXPECT_NEAR(z.tau0, 0.0857142857, 1e-10);

  const std::vector<double> positive{0.3, 0.2, 0.1, 0.05};
  const auto none = mz::first_zero(positive, 0.1);
  EXPECT_FALSE(none.crossed);
  EXPECT_DOUBLE_EQ(none.tau0, 0.3);

  EXPECT_THROW(mz::first_zero(std::vector<double>{0.0, 1.0}, 0.1), std::invalid_argument);
}

TEST(FirstZero, ReferenceBetaCurve) {
  // Reference beta(l k) values for the default model, followed by one
  // negative value: the crossing sits just above 0.50.
  std::vector<double> beta{0.1008, 0.0994, 0.0958, 0.0901, 0.0823, 0.0727,
                           0.0615, 0.0490, 0.0354, 0.0212, 0.0065, -0.0080};
  const auto z = mz::first_zero(beta, 0.05);
  EXPECT_GT(z.tau0, 0.50);
  EXPECT_LT(z.tau0, 0.55);
}

TEST(FitDecay, RecoversExactGeometric) {
  std::vector<double> beta(21);
  for (std::size_t l = 0; l < beta.size(); ++l) beta[l] = 0.1 * std::pow(0.9, l);
  const auto fit = mz::fit_decay(beta, 0.05, 1.0);
  EXPECT_NEAR(fit.beta0, 0.1, 1e-15);
  EXPECT_NEAR(fit.d, 0.9, 1e-6);
  EXPECT_DOUBLE_EQ(fit.fit_step, 0.05);
  EXPECT_DOUBLE_EQ(fit.tau0, 1.0);
}

TEST(FitDecay, StableUnderNoise) {
  mz::RngStream rng(77, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> beta(21);
    for (std::size_t l = 0; l < beta.size(); ++l) {
      beta[l] = 0.1 * std::pow(0.9, l) + (l == 0 ? 0.0 : 1e-3 * rng.normal());
    }
    const auto fit = mz::fit_decay(beta, 0.05, 1.0);
    EXPECT_NEAR(fit.d, 0.9, 0.01) << "trial " << trial;
  }
}

TEST(FitDecay, ReferenceBetaCurve) {
  // Least squares on the reference beta values lands near d = 0.902.
  const std::vector<double> beta{0.1008, 0.0994, 0.0958, 0.0901, 0.0823, 0.0727,
                                 0.0615, 0.0490, 0.0354, 0.0212, 0.0065};
  const auto fit = mz::fit_decay(beta, 0.05, 0.50);
  EXPECT_NEAR(fit.d, 0.902, 0.02);
}

TEST(FitDecay, Errors) {
  EXPECT_THROW(mz::fit_decay(std::vector<double>{0.1, 0.09, 0.08}, 0.05, 0.05),
               std::invalid_argument);
  EXPECT_THROW(mz::fit_decay(std::vector<double>{-0.1, 0.09, 0.08}, 0.05, 0.1),
               std::invalid_argument);
}

TEST(RescaleDecay, Examples) {
  EXPECT_DOUBLE_EQ(mz::rescale_decay(0.902, 0.05, 0.05), 0.902);
  EXPECT_NEAR(mz::rescale_decay(0.902, 0.05, 0.01), std::pow(0.902, 0.2), 1e-15);
  EXPECT_NEAR(mz::rescale_decay(0.902, 0.05, 0.01), 0.9796, 5e-5);
  for (double d : {0.1, 0.5, 0.902, 0.999}) {
    const double there = mz::rescale_decay(d, 0.05, 0.013);
    EXPECT_NEAR(mz::rescale_decay(there, 0.013, 0.05), d, 1e-12);
  }
  EXPECT_THROW(mz::rescale_decay(1.0, 0.05, 0.01), std::invalid_argument);
  EXPECT_THROW(mz::rescale_decay(0.5, 0.0, 0.01), std::invalid_argument);
}

TEST(FitFile, RoundTrip) {
  mz::NoiseFit fit;
  fit.beta0 = 0.1008;
  fit.d = 0.9021234567;
  fit.fit_step = 0.05;
  fit.tau0 = 0.5123;
  fit.tau0_crossed = false;
  fit.a_zero_fraction = 0.23;
  std::stringstream ss;
  mz::write_fit_json(ss, fit);
  const auto back = mz::read_fit_json(ss);
  EXPECT_DOUBLE_EQ(back.beta0, fit.beta0);
  EXPECT_NEAR(back.d, fit.d, 1e-9);
  EXPECT_DOUBLE_EQ(back.tau0, fit.tau0);
  EXPECT_FALSE(back.tau0_crossed);
  EXPECT_DOUBLE_EQ(back.a_zero_fraction, 0.23);

  std::stringstream missing("{\"beta0\": 0.1}");
  EXPECT_THROW(mz::read_fit_json(missing), std::runtime_error);
}

TEST(CsvWriters, Headers) {
  mz::CovarianceCurve curve;
  curve.lag_step = 0.5;
  curve.c = {0.2, 0.1};
  curve.c_star = {0.2, 0.15};
  curve = mz::decompose(curve, 0.05);
  std::stringstream cov;
  mz::write_covariance_csv(cov, curve);
  EXPECT_EQ(cov.str(), "tau,C,Cstar,beta\n0,0.2,0.2,0.15\n0.5,0.1,0.15,0.05\n");

  const std::vector<mz::PersistenceSample> samples{{0.25, 0.25, 0}, {-0.1, 0.0, 1}};
  std::stringstream pers;
  mz::write_persistence_csv(pers, samples);
  EXPECT_EQ(pers.str(), "trajectory_id,a,log_a\n0,0.25,-1.38629436\n1,-0.1,nan\n");
}

}  // namespace
