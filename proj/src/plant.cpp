#include "tmem/plant.hpp"

#include <cmath>

#include <fmt/core.h>

#include "tmem/errors.hpp"

namespace tmem {

void PlantParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError(fmt::format("plant parameter {} must be finite and > 0 (got {})", name, v));
    }
  };
  check(k_p, "k_p");
  check(k_d, "k_d");
  check(g, "g");
}

bool AgentState::is_finite() const noexcept {
  return std::isfinite(pos) && std::isfinite(vel) && std::isfinite(tilt) &&
         std::isfinite(tilt_rate);
}

AgentState& AgentState::operator+=(const AgentState& o) noexcept {
  pos += o.pos;
  vel += o.vel;
  tilt += o.tilt;
  tilt_rate += o.tilt_rate;
  return *this;
}

AgentState& AgentState::operator*=(double s) noexcept {
  pos *= s;
  vel *= s;
  tilt *= s;
  tilt_rate *= s;
  return *this;
}

AgentState derivative(const AgentState& state, double u, const PlantParams& plant) {
  if (!state.is_finite() || !std::isfinite(u)) {
    throw NumericDomainError("derivative: non-finite state or command");
  }
  const double kpkd = plant.k_p * plant.k_d;
  return {state.vel, plant.g * state.tilt, state.tilt_rate,
          -kpkd * state.tilt - plant.k_d * state.tilt_rate + kpkd * u};
}

AgentState rk4_step(const AgentState& state, double u_held, double dt, const PlantParams& plant) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError(fmt::format("rk4_step: dt must be finite and > 0 (got {})", dt));
  }
  const double h = 0.5 * dt;
  const AgentState k1 = derivative(state, u_held, plant);
  const AgentState k2 = derivative(state + h * k1, u_held, plant);
  const AgentState k3 = derivative(state + h * k2, u_held, plant);
  const AgentState k4 = derivative(state + dt * k3, u_held, plant);
  return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace tmem
