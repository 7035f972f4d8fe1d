#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "tmem/errors.hpp"
#include "tmem/modal_control.hpp"

using namespace tmem;
using cd = std::complex<double>;

namespace {

const PlantParams kReference{6.0, 25.0, 9.8};
const PoleSpec kReferencePoles{12.0, 0.1, 0.55};

// (s^2 + 2 r s + r^2 + im^2)(s^2 + imr^2), expanded by hand.
std::array<double, 5> factored_expansion(const PoleSpec& p) {
  const double a1 = 2.0 * p.r_l;
  const double a0 = p.r_l * p.r_l + p.im_l * p.im_l;
  const double w2 = p.im_r * p.im_r;
  return {1.0, a1, a0 + w2, a1 * w2, a0 * w2};
}

// Closed-loop coefficients of the chain plant written out term by term.
std::array<double, 5> chain_closed_loop(const PlantParams& p, const Gains& k) {
  const double a = p.k_p * p.k_d;
  return {1.0, p.k_d + a * k.k_rate, a * (1.0 + k.k_tilt), p.g * a * k.k_vel, p.g * a * k.k_pos};
}

// Gains obtained by equating each coefficient of the two quartics independently.
Gains coefficient_matching_oracle(const PlantParams& p, const std::array<double, 5>& c) {
  const double a = p.k_p * p.k_d;
  Gains k;
  k.k_rate = (c[1] - p.k_d) / a;
  k.k_tilt = c[2] / a - 1.0;
  k.k_vel = c[3] / (p.g * a);
  k.k_pos = c[4] / (p.g * a);
  return k;
}

struct Sample {
  PlantParams plant;
  PoleSpec spec;
};

std::vector<Sample> random_samples(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> kp(0.5, 20.0), kd(1.0, 60.0), g(1.0, 20.0), rl(0.0, 30.0),
      im(0.0, 5.0), imr(0.05, 3.0);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{kp(rng), kd(rng), g(rng)}, {rl(rng), im(rng), imr(rng)}});
  return out;
}

}  // namespace

TEST(ModalControl, PolesFromSpec) {
  const PoleSet p = poles_from_spec(kReferencePoles);
  EXPECT_EQ(p[0], cd(-12.0, -0.1));
  EXPECT_EQ(p[1], cd(-12.0, 0.1));
  EXPECT_EQ(p[2], cd(0.0, -0.55));
  EXPECT_EQ(p[3], cd(0.0, 0.55));

  const PoleSet q = poles_from_spec({0.0, 1.0, 2.0});
  EXPECT_EQ(q[0], cd(0.0, -1.0));
  EXPECT_EQ(q[1], cd(0.0, 1.0));
  EXPECT_EQ(q[2], cd(0.0, -2.0));
  EXPECT_EQ(q[3], cd(0.0, 2.0));
}

TEST(ModalControl, PoleSpecInvariants) {
  EXPECT_THROW(poles_from_spec({-1.0, 0.1, 0.5}), ConfigError);
  EXPECT_THROW(poles_from_spec({1.0, 0.1, 0.0}), ConfigError);
}

TEST(ModalControl, DesiredPolynomialReference) {
  const Quartic q = desired_polynomial(poles_from_spec(kReferencePoles));
  const std::array<double, 5> expected{1.0, 24.0, 144.3125, 7.26, 43.563025};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(q[i], expected[i], 1e-12 * std::max(1.0, expected[i])) << i;
  EXPECT_EQ(q[0], 1.0);
}

TEST(ModalControl, DesiredPolynomialTrivialCases) {
  const Quartic sq = desired_polynomial({cd(0, 1), cd(0, -1), cd(0, 1), cd(0, -1)});
  EXPECT_EQ(sq.coeffs, (std::array<double, 5>{1, 0, 2, 0, 1}));
  const Quartic zero = desired_polynomial({cd(0, 0), cd(0, 0), cd(0, 0), cd(0, 0)});
  EXPECT_EQ(zero.coeffs, (std::array<double, 5>{1, 0, 0, 0, 0}));
}

TEST(ModalControl, DesiredPolynomialRejectsNonConjugateSet) {
  EXPECT_THROW(desired_polynomial({cd(-1, 1), cd(-1, 1), cd(0, 1), cd(0, -1)}), NumericDomainError);
  EXPECT_THROW(desired_polynomial({cd(-1, 0.5), cd(-2, 0), cd(-3, 0), cd(-4, 0)}), NumericDomainError);
}

TEST(ModalControl, DesiredPolynomialMatchesFactoredForm) {
  for (const Sample& s : random_samples(200, 11)) {
    const Quartic q = desired_polynomial(poles_from_spec(s.spec));
    const auto oracle = factored_expansion(s.spec);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(q[i], oracle[i], 1e-12 * std::max(1.0, std::abs(oracle[i])));
  }
}

TEST(ModalControl, UndampedPairIsARootOfDesiredPolynomial) {
  for (const Sample& s : random_samples(100, 12)) {
    const Quartic q = desired_polynomial(poles_from_spec(s.spec));
    const double scale = std::max({1.0, std::abs(q[2]), std::abs(q[4])});
    EXPECT_LT(std::abs(q.evaluate(cd(0.0, s.spec.im_r))) / scale, 1e-9);
  }
}

TEST(ModalControl, PlaceGainsReferenceValues) {
  const Gains k = place_gains(kReference, poles_from_spec(kReferencePoles));
  EXPECT_NEAR(k.k_pos, 0.0296347, 1e-6);
  EXPECT_NEAR(k.k_vel, 0.0049388, 1e-6);
  EXPECT_NEAR(k.k_tilt, -0.0379167, 1e-6);
  EXPECT_NEAR(k.k_rate, -0.0066667, 1e-6);
  EXPECT_EQ(k.k1, k.k_pos);

  const Gains oracle = coefficient_matching_oracle(kReference, {1.0, 24.0, 144.3125, 7.26, 43.563025});
  EXPECT_NEAR(k.k_pos, oracle.k_pos, 1e-14);
  EXPECT_NEAR(k.k_vel, oracle.k_vel, 1e-14);
  EXPECT_NEAR(k.k_tilt, oracle.k_tilt, 1e-14);
  EXPECT_NEAR(k.k_rate, oracle.k_rate, 1e-14);
}

TEST(ModalControl, PlaceGainsAtOpenLoopRootsIsZero) {
  // s^4 + 25 s^3 + 150 s^2 = s^2 (s + 10)(s + 15)
  const Gains k = place_gains(kReference, {cd(0, 0), cd(0, 0), cd(-10, 0), cd(-15, 0)});
  EXPECT_NEAR(k.k_pos, 0.0, 1e-15);
  EXPECT_NEAR(k.k_vel, 0.0, 1e-15);
  EXPECT_NEAR(k.k_tilt, 0.0, 1e-15);
  EXPECT_NEAR(k.k_rate, 0.0, 1e-15);
}

TEST(ModalControl, PlaceGainsRejectsUnreachablePlant) {
  const PoleSet p = poles_from_spec(kReferencePoles);
  EXPECT_THROW(place_gains({6.0, 25.0, 0.0}, p), SynthesisError);
  EXPECT_THROW(place_gains({0.0, 25.0, 9.8}, p), SynthesisError);
  EXPECT_THROW(place_gains({6.0, 0.0, 9.8}, p), SynthesisError);
}

TEST(ModalControl, ClosedLoopPolynomialOpenLoop) {
  const Quartic q = closed_loop_polynomial(kReference, Gains{});
  const std::array<double, 5> expected{1, 25, 150, 0, 0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(q[i], expected[i], 1e-12);
}

TEST(ModalControl, ClosedLoopPolynomialReference) {
  const Gains k = place_gains(kReference, poles_from_spec(kReferencePoles));
  const Quartic q = closed_loop_polynomial(kReference, k);
  const Quartic want{{1.0, 24.0, 144.3125, 7.26, 43.563025}};
  EXPECT_LT(relative_residual(q, want), 1e-9);
}

TEST(ModalControl, RateGainPerturbationOnlyMovesCubicTerm) {
  Gains k = place_gains(kReference, poles_from_spec(kReferencePoles));
  const Quartic before = closed_loop_polynomial(kReference, k);
  const double delta = 1e-3;
  k.k_rate += delta;
  const Quartic after = closed_loop_polynomial(kReference, k);
  EXPECT_NEAR(after[1] - before[1], kReference.k_p * kReference.k_d * delta, 1e-11);
  for (std::size_t i : {0u, 2u, 3u, 4u}) EXPECT_NEAR(after[i], before[i], 1e-11) << i;
}

TEST(ModalControl, FaddeevLeVerrierAgreesWithChainFormula) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> gain(-0.5, 0.5);
  for (const Sample& s : random_samples(100, 13)) {
    const Gains k{gain(rng), gain(rng), gain(rng), gain(rng), 0.0};
    const Quartic q = closed_loop_polynomial(s.plant, k);
    const auto oracle = chain_closed_loop(s.plant, k);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(q[i], oracle[i], 1e-10 * std::max(1.0, std::abs(oracle[i])));
  }
}

TEST(ModalControl, RoundTripPlacesRequestedPoles) {
  for (const Sample& s : random_samples(500, 14)) {
    const PoleSet poles = poles_from_spec(s.spec);
    const Quartic got = closed_loop_polynomial(s.plant, place_gains(s.plant, poles));
    EXPECT_LT(relative_residual(got, desired_polynomial(poles)), 1e-9);
  }
}

TEST(ModalControl, SymmetricFormulaReferenceValues) {
  const auto f = symmetric_gain_formula(kReference, poles_from_spec(kReferencePoles));
  EXPECT_NEAR(f[0], 0.0049388, 1e-5);
  EXPECT_NEAR(f[1], 0.0296347, 1e-5);
  EXPECT_NEAR(f[2], 0.96208, 1e-5);
  EXPECT_NEAR(f[3], -0.0066667, 1e-5);
}

TEST(ModalControl, SymmetricFormulaRelationsToPlacedGains) {
  for (const Sample& s : random_samples(100, 15)) {
    const PoleSet poles = poles_from_spec(s.spec);
    const Gains k = place_gains(s.plant, poles);
    const auto f = symmetric_gain_formula(s.plant, poles);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    EXPECT_TRUE(close(f[0], k.k_vel));
    EXPECT_TRUE(close(f[1], k.k_pos));
    EXPECT_TRUE(close(f[2], 1.0 + k.k_tilt));
    EXPECT_TRUE(close(f[3], k.k_rate));
  }
}

TEST(ModalControl, SymmetricFormulaGravityScaling) {
  const PoleSet p = poles_from_spec(kReferencePoles);
  const auto f1 = symmetric_gain_formula(kReference, p);
  const auto f2 = symmetric_gain_formula({kReference.k_p, kReference.k_d, 2.0 * kReference.g}, p);
  EXPECT_NEAR(f2[0], 0.5 * f1[0], 1e-16);
  EXPECT_NEAR(f2[1], 0.5 * f1[1], 1e-16);
  EXPECT_EQ(f2[2], f1[2]);
  EXPECT_EQ(f2[3], f1[3]);
}

TEST(ModalControl, SynthesisIsFast) {
  const auto start = std::chrono::steady_clock::now();
  const PoleSet p = poles_from_spec(kReferencePoles);
  const Quartic q = closed_loop_polynomial(kReference, place_gains(kReference, p));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(relative_residual(q, desired_polynomial(p)), 1e-9);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1e-3);
}
