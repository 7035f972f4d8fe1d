#pragma once

#include <array>

namespace tmem {

/// Parameters of the linearized single-axis quadcopter.
struct PlantParams {
  double k_p = 6.0;   ///< angle-loop gain, 1/s
  double k_d = 25.0;  ///< rate-loop gain, 1/s
  double g = 9.8;     ///< gravitational acceleration, m/s^2

  /// Throws ConfigError unless all three are finite and positive.
  void validate() const;

  friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

/// State of one agent along the horizontal axis. Also used for its time
/// derivative, which has the same shape.
struct AgentState {
  double pos = 0.0;        ///< m
  double vel = 0.0;        ///< m/s
  double tilt = 0.0;       ///< rad from vertical
  double tilt_rate = 0.0;  ///< rad/s

  bool is_finite() const noexcept;
  std::array<double, 4> as_array() const noexcept { return {pos, vel, tilt, tilt_rate}; }

  AgentState& operator+=(const AgentState& o) noexcept;
  AgentState& operator*=(double s) noexcept;
  friend AgentState operator+(AgentState a, const AgentState& b) noexcept { return a += b; }
  friend AgentState operator*(double s, AgentState a) noexcept { return a *= s; }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Tilt magnitude above which the small-angle linearization is considered suspect.
inline constexpr double kSmallAngleLimit = 0.5;

/// Right-hand side of the state-space model for commanded tilt `u`:
/// (vel, g*tilt, tilt_rate, -kp*kd*tilt - kd*tilt_rate + kp*kd*u).
/// Throws NumericDomainError on non-finite input.
AgentState derivative(const AgentState& state, double u, const PlantParams& plant);

/// One classical RK4 step with `u_held` constant over the step.
/// Throws ConfigError when dt is not a positive finite number.
AgentState rk4_step(const AgentState& state, double u_held, double dt, const PlantParams& plant);

}  // namespace tmem
