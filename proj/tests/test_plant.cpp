#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tmem/errors.hpp"
#include "tmem/plant.hpp"

using namespace tmem;

namespace {

const PlantParams kReference{6.0, 25.0, 9.8};

AgentState integrate_for(AgentState s, double u, double dt, double horizon, const PlantParams& p) {
  const auto n = static_cast<long>(std::llround(horizon / dt));
  for (long i = 0; i < n; ++i) s = rk4_step(s, u, dt, p);
  return s;
}

double max_abs_diff(const AgentState& a, const AgentState& b) {
  return std::max({std::abs(a.pos - b.pos), std::abs(a.vel - b.vel), std::abs(a.tilt - b.tilt),
                   std::abs(a.tilt_rate - b.tilt_rate)});
}

}  // namespace

TEST(Plant, DerivativeAtEquilibriumIsZero) {
  EXPECT_EQ(derivative({}, 0.0, kReference), AgentState{});
}

TEST(Plant, DerivativeRowsByHand) {
  // rows: vel, g*tilt, rate, -kp*kd*tilt - kd*rate + kp*kd*u
  const AgentState d1 = derivative({0, 0, 0.1, 0}, 0.0, kReference);
  EXPECT_DOUBLE_EQ(d1.pos, 0.0);
  EXPECT_NEAR(d1.vel, 0.98, 1e-15);
  EXPECT_DOUBLE_EQ(d1.tilt, 0.0);
  EXPECT_NEAR(d1.tilt_rate, -15.0, 1e-12);

  const AgentState d2 = derivative({5, 2, 0, 0}, 0.05, kReference);
  EXPECT_DOUBLE_EQ(d2.pos, 2.0);
  EXPECT_DOUBLE_EQ(d2.vel, 0.0);
  EXPECT_DOUBLE_EQ(d2.tilt, 0.0);
  EXPECT_NEAR(d2.tilt_rate, 7.5, 1e-12);
}

TEST(Plant, DerivativeRejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(derivative({nan, 0, 0, 0}, 0.0, kReference), NumericDomainError);
  EXPECT_THROW(derivative({}, std::numeric_limits<double>::infinity(), kReference), NumericDomainError);
}

TEST(Plant, DerivativeIsLinear) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const AgentState s1{dist(rng), dist(rng), dist(rng), dist(rng)};
    const AgentState s2{dist(rng), dist(rng), dist(rng), dist(rng)};
    const double u1 = dist(rng), u2 = dist(rng), a = dist(rng), b = dist(rng);
    const AgentState lhs = derivative(a * s1 + b * s2, a * u1 + b * u2, kReference);
    const AgentState rhs = a * derivative(s1, u1, kReference) + b * derivative(s2, u2, kReference);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
  }
}

TEST(Plant, Rk4EquilibriumIsFixedPoint) {
  for (double dt : {1e-4, 1e-3, 0.1}) EXPECT_EQ(rk4_step({}, 0.0, dt, kReference), AgentState{});
}

TEST(Plant, Rk4BallisticStep) {
  const AgentState s = rk4_step({0, 3, 0, 0}, 0.0, 0.001, kReference);
  EXPECT_NEAR(s.pos, 0.003, 1e-18);
  EXPECT_EQ(s.vel, 3.0);
  EXPECT_EQ(s.tilt, 0.0);
  EXPECT_EQ(s.tilt_rate, 0.0);
}

TEST(Plant, Rk4FreeFlightIsExactlyLinearInTime) {
  AgentState s{-12.0, 2.5, 0.0, 0.0};
  for (int k = 1; k <= 40000; ++k) {
    s = rk4_step(s, 0.0, 0.001, kReference);
    ASSERT_EQ(s.vel, 2.5);
  }
  EXPECT_NEAR(s.pos, -12.0 + 2.5 * 40.0, 1e-9);
}

TEST(Plant, Rk4RejectsNonPositiveStep) {
  EXPECT_THROW(rk4_step({}, 0.0, 0.0, kReference), ConfigError);
  EXPECT_THROW(rk4_step({}, 0.0, -1e-3, kReference), ConfigError);
  EXPECT_THROW(rk4_step({}, 0.0, std::numeric_limits<double>::quiet_NaN(), kReference), ConfigError);
}

TEST(Plant, Rk4RichardsonRatioIsFourthOrder) {
  const AgentState x0{0, 0, 0.1, 0};
  const double u = 0.05, horizon = 1.0;
  const AgentState reference = integrate_for(x0, u, 1e-6, horizon, kReference);
  const double e1 = max_abs_diff(integrate_for(x0, u, 0.01, horizon, kReference), reference);
  const double e2 = max_abs_diff(integrate_for(x0, u, 0.005, horizon, kReference), reference);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Plant, ParamsValidate) {
  EXPECT_NO_THROW(kReference.validate());
  EXPECT_THROW((PlantParams{0.0, 25.0, 9.8}).validate(), ConfigError);
  EXPECT_THROW((PlantParams{6.0, -1.0, 9.8}).validate(), ConfigError);
  EXPECT_THROW((PlantParams{6.0, 25.0, 0.0}).validate(), ConfigError);
}
