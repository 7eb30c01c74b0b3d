#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mz/model.hpp"
#include "oracles.hpp"

namespace {

using mz::FullState;
using mz::ModelParams;
using mz::ReducedState;

ModelParams standard() { return ModelParams::standard(); }

FullState example_state() {
  FullState s;
  s.q = 1.0;
  s.p = 0.0;
  s.qu = {1.0, 1.0};
  s.pu = {0.0, 0.0};
  return s;
}

ModelParams empty_bath() {
  ModelParams p;
  p.m = 0;
  p.g.clear();
  return p;
}

FullState random_state(std::mt19937_64& gen, int m) {
  std::normal_distribution<double> n(0.0, 1.0);
  FullState s = FullState::zeros(m);
  s.q = n(gen);
  s.p = n(gen);
  for (int i = 0; i < m; ++i) {
    s.qu[i] = n(gen);
    s.pu[i] = n(gen);
  }
  return s;
}

TEST(ModelParams, DefaultsForBathSize) {
  const auto p = ModelParams::with_bath_size(2);
  EXPECT_DOUBLE_EQ(p.alpha, 0.5);
  EXPECT_DOUBLE_EQ(p.epsilon, 0.5);
  EXPECT_DOUBLE_EQ(p.temperature, 1.0);
  ASSERT_EQ(p.g.size(), 2u);
  EXPECT_DOUBLE_EQ(p.g[0], std::sqrt(5.0) / 2.0);
  EXPECT_DOUBLE_EQ(p.g[1], std::sqrt(3.0) / 2.0);
  EXPECT_NO_THROW(p.validate());

  const auto p3 = ModelParams::with_bath_size(3);
  EXPECT_DOUBLE_EQ(p3.alpha, 1.0 / 3.0);
  EXPECT_THROW(p3.validate(), std::invalid_argument);  // g not supplied
}

TEST(ModelParams, RejectsInvalid) {
  auto p = standard();
  p.epsilon = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = standard();
  p.g[1] = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = standard();
  p.temperature = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(FullRhs, OriginIsFixedPoint) {
  const auto d = mz::full_rhs(standard(), FullState::zeros(2));
  EXPECT_EQ(d.q, 0.0);
  EXPECT_EQ(d.p, 0.0);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(d.qu[i], 0.0);
    EXPECT_EQ(d.pu[i], 0.0);
  }
}

TEST(FullRhs, WorkedExample) {
  const auto d = mz::full_rhs(standard(), example_state());
  EXPECT_DOUBLE_EQ(d.q, 0.0);
  EXPECT_DOUBLE_EQ(d.p, -2.0);
  EXPECT_DOUBLE_EQ(d.qu[0], 0.0);
  EXPECT_DOUBLE_EQ(d.qu[1], 0.0);
  EXPECT_DOUBLE_EQ(d.pu[0], -2.5);
  EXPECT_DOUBLE_EQ(d.pu[1], -2.5);
}

TEST(FullRhs, MatchesFiniteDifferenceHamiltonianField) {
  const auto P = mz::oracle::standard();
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(gen, 2);
    const auto y = mz::pack(s);
    const auto expected = mz::oracle::hamiltonian_vector_field(P, y);
    const auto got = mz::pack(mz::full_rhs(standard(), s));
    for (std::size_t k = 0; k < y.size(); ++k) {
      EXPECT_NEAR(got[k], expected[k], 1e-6 * (1.0 + std::abs(expected[k])));
    }
  }
}

TEST(FullRhs, EmptyBathIsHarmonicOscillator) {
  FullState s = FullState::zeros(0);
  s.q = 0.3;
  s.p = -0.7;
  const auto d = mz::full_rhs(empty_bath(), s);
  EXPECT_EQ(d.q, -0.7);
  EXPECT_EQ(d.p, -0.3);
}

TEST(FullRhs, DimensionMismatchThrows) {
  EXPECT_THROW(mz::full_rhs(standard(), FullState::zeros(3)), mz::DimensionMismatch);
  EXPECT_THROW(mz::energy_full(standard(), FullState::zeros(1)), mz::DimensionMismatch);
  EXPECT_THROW(mz::z_exact(standard(), FullState::zeros(3)), mz::DimensionMismatch);
  EXPECT_THROW(mz::noise_exact(standard(), FullState::zeros(0)), mz::DimensionMismatch);
}

TEST(EnergyFull, Examples) {
  EXPECT_EQ(mz::energy_full(standard(), FullState::zeros(2)), 0.0);
  EXPECT_DOUBLE_EQ(mz::energy_full(standard(), example_state()), 3.0);
  FullState s = FullState::zeros(2);
  s.p = 1.7;
  EXPECT_DOUBLE_EQ(mz::energy_full(standard(), s), 0.5 * 1.7 * 1.7);
}

TEST(EnergyFull, AgreesWithIndependentHamiltonian) {
  const auto P = mz::oracle::standard();
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(gen, 2);
    EXPECT_NEAR(mz::energy_full(standard(), s), mz::oracle::hamiltonian(P, mz::pack(s)), 1e-12);
  }
}

TEST(MeanForce, Examples) {
  EXPECT_EQ(mz::mean_force(standard(), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(mz::mean_force(standard(), 1.0), 1.4);
  EXPECT_NEAR(mz::mean_force(standard(), 1e8) / 1e8, 1.0, 1e-12);
}

TEST(MeanForce, RejectsNonUnitTemperature) {
  auto p = standard();
  p.temperature = 2.0;
  EXPECT_THROW(mz::mean_force(p, 1.0), std::invalid_argument);
  EXPECT_THROW(mz::energy_reduced(p, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(mz::reduced_rhs(p, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(mz::tmodel_rhs(p, {1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST(ReducedRhs, Examples) {
  EXPECT_EQ(mz::reduced_rhs(standard(), {0.0, 0.0}), (ReducedState{0.0, -0.0}));
  const auto d = mz::reduced_rhs(standard(), {1.0, 0.0});
  EXPECT_DOUBLE_EQ(d.q, 0.0);
  EXPECT_DOUBLE_EQ(d.p, -1.4);
  const auto h = mz::reduced_rhs(empty_bath(), {0.4, 0.9});
  EXPECT_DOUBLE_EQ(h.q, 0.9);
  EXPECT_DOUBLE_EQ(h.p, -0.4);
}

TEST(EnergyReduced, Examples) {
  EXPECT_EQ(mz::energy_reduced(standard(), {0.0, 0.0}), 0.0);
  EXPECT_NEAR(mz::energy_reduced(standard(), {1.0, 1.0}), 1.0 + std::log(1.25), 1e-14);
  EXPECT_NEAR(mz::energy_reduced(standard(), {1.0, 1.0}), 1.22314355131421, 1e-12);
}

TEST(EnergyReduced, GradientIsMeanForce) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const auto params = standard();
  for (int trial = 0; trial < 100; ++trial) {
    const double q = u(gen);
    const double p = u(gen);
    auto H = [&](const std::vector<double>& x) {
      return mz::energy_reduced(params, {x[0], x[1]});
    };
    const double dHdq = mz::oracle::partial(H, {q, p}, 0, 1e-5);
    const double dHdp = mz::oracle::partial(H, {q, p}, 1, 1e-5);
    const double f = mz::mean_force(params, q);
    EXPECT_LT(std::abs(dHdq - f), 1e-6 * std::max(1.0, std::abs(f)));
    const auto field = mz::reduced_rhs(params, {q, p});
    EXPECT_NEAR(field.q, dHdp, 1e-8);
    EXPECT_NEAR(field.p, -dHdq, 1e-6 * std::max(1.0, std::abs(f)));
  }
}

TEST(TModelRhs, Examples) {
  const auto params = standard();
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ReducedState s{n(gen), n(gen)};
    EXPECT_EQ(mz::tmodel_rhs(params, s, 0.0), mz::reduced_rhs(params, s));
  }
  const auto d = mz::tmodel_rhs(params, {1.0, 1.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.q, 1.0);
  EXPECT_NEAR(d.p, -1.56, 1e-14);
  for (double t : {0.0, 1.0, 7.5}) {
    EXPECT_EQ(mz::tmodel_rhs(params, {0.0, 3.0}, t).p, 0.0);
  }
}

TEST(Noise, Examples) {
  const auto params = standard();
  FullState s = FullState::zeros(2);
  EXPECT_DOUBLE_EQ(mz::z_exact(params, s), 0.5);
  EXPECT_EQ(mz::noise_exact(params, s), 0.0);
  s.q = 1.0;
  EXPECT_DOUBLE_EQ(mz::noise_exact(params, s), 0.4);

  // alpha sum q_i^2 balancing m alpha eps / (1 + alpha eps q^2) gives z = 0.
  s.q = 2.0;
  const double target = 2.0 * 0.25 / (1.0 + 0.25 * 4.0) / 0.5;  // sum q_i^2
  s.qu = {std::sqrt(target / 2.0), std::sqrt(target / 2.0)};
  EXPECT_NEAR(mz::z_exact(params, s), 0.0, 1e-15);
}

TEST(Noise, IsFullMinusReducedDrift) {
  const auto params = standard();
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(gen, 2);
    const double full_dp = mz::full_rhs(params, s).p;
    const double reduced_dp = mz::reduced_rhs(params, {s.q, s.p}).p;
    EXPECT_NEAR(mz::noise_exact(params, s), full_dp - reduced_dp,
                1e-15 * (1.0 + std::abs(full_dp) + std::abs(reduced_dp)));
  }
}

TEST(Parity, AllVectorFieldsAreOdd) {
  const auto params = standard();
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(gen, 2);
    FullState neg = s;
    neg.q = -s.q;
    neg.p = -s.p;
    for (auto& v : neg.qu) v = -v;
    for (auto& v : neg.pu) v = -v;
    const auto a = mz::pack(mz::full_rhs(params, s));
    const auto b = mz::pack(mz::full_rhs(params, neg));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], -b[k]);

    const auto r = mz::reduced_rhs(params, {s.q, s.p});
    const auto rn = mz::reduced_rhs(params, {-s.q, -s.p});
    EXPECT_EQ(r.q, -rn.q);
    EXPECT_EQ(r.p, -rn.p);
    const auto t = mz::tmodel_rhs(params, {s.q, s.p}, 2.5);
    const auto tn = mz::tmodel_rhs(params, {-s.q, -s.p}, 2.5);
    EXPECT_EQ(t.q, -tn.q);
    EXPECT_EQ(t.p, -tn.p);
  }
}

TEST(Pack, RoundTrip) {
  std::mt19937_64 gen(1);
  const auto s = random_state(gen, 4);
  const auto back = mz::unpack(mz::pack(s));
  EXPECT_EQ(back.q, s.q);
  EXPECT_EQ(back.p, s.p);
  EXPECT_EQ(back.qu, s.qu);
  EXPECT_EQ(back.pu, s.pu);
  EXPECT_THROW(mz::unpack(std::vector<double>{1.0, 2.0, 3.0}), mz::DimensionMismatch);
}

TEST(NoiseMultiplier, Parse) {
  EXPECT_EQ(mz::parse_noise_multiplier("q"), mz::NoiseMultiplier::q);
  EXPECT_EQ(mz::parse_noise_multiplier("p"), mz::NoiseMultiplier::p);
  EXPECT_THROW(mz::parse_noise_multiplier("x"), std::invalid_argument);
}

}  // namespace
