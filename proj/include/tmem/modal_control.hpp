#pragma once

#include <array>
#include <complex>

#include "tmem/plant.hpp"

namespace tmem {

/// One damped conjugate pair -r_l +/- i*im_l and one undamped pair +/- i*im_r.
/// The undamped pair is what keeps interactions energy-preserving.
struct PoleSpec {
  double r_l = 12.0;
  double im_l = 0.1;
  double im_r = 0.55;

  void validate() const;

  friend bool operator==(const PoleSpec&, const PoleSpec&) = default;
};

using PoleSet = std::array<std::complex<double>, 4>;

/// Monic quartic, coefficients in descending powers; coeffs[0] == 1.
struct Quartic {
  std::array<double, 5> coeffs{1.0, 0.0, 0.0, 0.0, 0.0};

  double operator[](std::size_t i) const noexcept { return coeffs[i]; }
  std::complex<double> evaluate(std::complex<double> s) const noexcept;
  friend bool operator==(const Quartic&, const Quartic&) = default;
};

/// State-feedback gains for u = -(k_pos*P + k_vel*V + k_tilt*tilt + k_rate*rate),
/// plus the interaction stiffness k1 used by the force laws.
struct Gains {
  double k_pos = 0.0;   ///< rad/m
  double k_vel = 0.0;   ///< rad*s/m
  double k_tilt = 0.0;  ///< rad/rad
  double k_rate = 0.0;  ///< rad*s/rad
  double k1 = 0.0;      ///< rad/m

  bool is_finite() const noexcept;
  double feedback(const AgentState& x) const noexcept {
    return k_pos * x.pos + k_vel * x.vel + k_tilt * x.tilt + k_rate * x.tilt_rate;
  }
  friend bool operator==(const Gains&, const Gains&) = default;
};

PoleSet poles_from_spec(const PoleSpec& spec);

/// Real expansion of prod(s - p_i). Throws NumericDomainError if the set is not
/// closed under conjugation.
Quartic desired_polynomial(const PoleSet& poles);

/// Coefficient-matching placement for the chain plant; k1 is set to k_pos.
/// Throws SynthesisError when g or kp*kd vanish.
Gains place_gains(const PlantParams& plant, const PoleSet& poles);

/// Published closed-form gain vector in terms of the elementary symmetric
/// functions of the poles, with beta = 1/(kp*kd), evaluated term by term:
///   (-beta/g * e3, beta/g * e4, beta * e2, -beta * (kd + e1))
/// Relative to place_gains() this is (k_vel, k_pos, 1 + k_tilt, k_rate), i.e. it
/// does not match the (P, V, tilt, rate) ordering. Cross-check only.
std::array<double, 4> symmetric_gain_formula(const PlantParams& plant, const PoleSet& poles);

/// Characteristic polynomial of A - B*K, computed from the 4x4 matrix by the
/// Faddeev-LeVerrier recursion (independent of place_gains' closed form).
Quartic closed_loop_polynomial(const PlantParams& plant, const Gains& gains);

/// max_i |a_i - b_i| / max(1, |b_i|)
double relative_residual(const Quartic& a, const Quartic& b) noexcept;

}  // namespace tmem
