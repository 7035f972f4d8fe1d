#include "tmem/modal_control.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tmem/errors.hpp"

namespace tmem {

namespace {

using cd = std::complex<double>;
using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 multiply(const Mat4& x, const Mat4& y) {
  Mat4 r{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < 4; ++j) r[i][j] += x[i][k] * y[k][j];
  return r;
}

void check_reachable(const PlantParams& plant) {
  if (!std::isfinite(plant.g) || !std::isfinite(plant.k_p) || !std::isfinite(plant.k_d)) {
    throw SynthesisError("plant parameters must be finite");
  }
  if (plant.g == 0.0) {
    throw SynthesisError("g = 0: position and velocity are unreachable from the tilt command");
  }
  if (plant.k_p * plant.k_d == 0.0) {
    throw SynthesisError("kp*kd = 0: the tilt command does not reach the plant");
  }
}

bool conjugate_closed(const PoleSet& poles) {
  std::array<bool, 4> used{};
  for (std::size_t i = 0; i < 4; ++i) {
    const cd target = std::conj(poles[i]);
    const double tol = 1e-12 * std::max(1.0, std::abs(target));
    bool found = false;
    for (std::size_t j = 0; j < 4 && !found; ++j) {
      if (!used[j] && std::abs(poles[j] - target) <= tol) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

void PoleSpec::validate() const {
  if (!std::isfinite(r_l) || !std::isfinite(im_l) || !std::isfinite(im_r)) {
    throw ConfigError("pole specification must be finite");
  }
  if (r_l < 0.0) throw ConfigError(fmt::format("r_l must be >= 0 (got {})", r_l));
  if (im_r <= 0.0) throw ConfigError(fmt::format("im_r must be > 0 (got {})", im_r));
}

std::complex<double> Quartic::evaluate(std::complex<double> s) const noexcept {
  cd acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

bool Gains::is_finite() const noexcept {
  return std::isfinite(k_pos) && std::isfinite(k_vel) && std::isfinite(k_tilt) &&
         std::isfinite(k_rate) && std::isfinite(k1);
}

PoleSet poles_from_spec(const PoleSpec& spec) {
  spec.validate();
  return {cd{-spec.r_l, -spec.im_l}, cd{-spec.r_l, spec.im_l}, cd{0.0, -spec.im_r},
          cd{0.0, spec.im_r}};
}

Quartic desired_polynomial(const PoleSet& poles) {
  for (const cd& p : poles) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw NumericDomainError("desired_polynomial: non-finite pole");
    }
  }
  if (!conjugate_closed(poles)) {
    throw NumericDomainError("desired_polynomial: pole set is not closed under conjugation");
  }
  std::array<cd, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    // multiply by (s - p_k)
    for (std::size_t i = k + 1; i > 0; --i) c[i] -= poles[k] * c[i - 1];
  }
  Quartic q;
  for (std::size_t i = 0; i < 5; ++i) {
    if (std::abs(c[i].imag()) > 1e-12 * std::max(1.0, std::abs(c[i].real()))) {
      throw NumericDomainError(
          fmt::format("desired_polynomial: imaginary residue {} in coefficient {}", c[i].imag(), i));
    }
    q.coeffs[i] = c[i].real();
  }
  q.coeffs[0] = 1.0;
  return q;
}

Gains place_gains(const PlantParams& plant, const PoleSet& poles) {
  check_reachable(plant);
  const Quartic q = desired_polynomial(poles);
  // s^4 + (kd + a*k_rate) s^3 + a(1 + k_tilt) s^2 + g*a*k_vel s + g*a*k_pos, a = kp*kd
  const double a = plant.k_p * plant.k_d;
  Gains k;
  k.k_rate = (q[1] - plant.k_d) / a;
  k.k_tilt = q[2] / a - 1.0;
  k.k_vel = q[3] / (plant.g * a);
  k.k_pos = q[4] / (plant.g * a);
  k.k1 = k.k_pos;
  return k;
}

std::array<double, 4> symmetric_gain_formula(const PlantParams& plant, const PoleSet& poles) {
  check_reachable(plant);
  const double beta = 1.0 / (plant.k_p * plant.k_d);
  const double g_inv = 1.0 / plant.g;
  const PoleSet& p = poles;
  const cd triple = p[0] * p[1] * p[2] + p[0] * p[1] * p[3] + p[0] * p[2] * p[3] + p[1] * p[2] * p[3];
  const cd quad = p[0] * p[1] * p[2] * p[3];
  const cd pairs = p[1] * p[2] + p[1] * p[3] + p[2] * p[3] + p[0] * (p[1] + p[2] + p[3]);
  const cd sum = p[0] + p[1] + p[2] + p[3];
  return {(-beta * g_inv * triple).real(), (beta * g_inv * quad).real(), (beta * pairs).real(),
          (-beta * (plant.k_d + sum)).real()};
}

Quartic closed_loop_polynomial(const PlantParams& plant, const Gains& gains) {
  const double a = plant.k_p * plant.k_d;
  // A - B*K for u = -K x
  const Mat4 m{{{0.0, 1.0, 0.0, 0.0},
                {0.0, 0.0, plant.g, 0.0},
                {0.0, 0.0, 0.0, 1.0},
                {-a * gains.k_pos, -a * gains.k_vel, -a - a * gains.k_tilt,
                 -plant.k_d - a * gains.k_rate}}};

  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k) / k
  Quartic q;
  Mat4 mk{};
  for (std::size_t i = 0; i < 4; ++i) mk[i][i] = 1.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    const Mat4 am = multiply(m, mk);
    double tr = 0.0;
    for (std::size_t i = 0; i < 4; ++i) tr += am[i][i];
    const double ck = -tr / static_cast<double>(k);
    q.coeffs[k] = ck;
    mk = am;
    for (std::size_t i = 0; i < 4; ++i) mk[i][i] += ck;
  }
  return q;
}

double relative_residual(const Quartic& a, const Quartic& b) noexcept {
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

}  // namespace tmem
