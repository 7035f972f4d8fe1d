#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tmem/modal_control.hpp"
#include "tmem/plant.hpp"

namespace tmem {

/// Pairwise interaction laws.
///   Repulsion        - saturated spring on the sphere overlap, zero outside.
///   Attraction       - radius-gated spring centred on the coupling distance.
///   Switching        - repulsion until coupled, then an ungated spring centred
///                      on the coupling distance; the command jumps at the switch.
///   SmoothSwitching  - as Switching, but the approach law is a tent that meets
///                      the coupled spring at the coupling distance, so the
///                      switch is continuous in the command.
enum class Variant { Repulsion, Attraction, Switching, SmoothSwitching };

std::string_view to_string(Variant v) noexcept;
/// Accepts the canonical names above in snake_case plus the short aliases
/// "v10" (switching) and "v11" (smooth_switching).
std::optional<Variant> parse_variant(std::string_view name) noexcept;
bool has_coupling_state(Variant v) noexcept;

struct InteractionParams {
  double c_max = 0.05;  ///< saturation of the commanded tilt contribution, rad
  double d_t = 30.0;    ///< coupling distance, m
  double eps = 0.1;     ///< switching neighbourhood half-width, m
  Variant variant = Variant::SmoothSwitching;
  double k1 = 0.0;      ///< stiffness, rad/m

  /// Checks c_max, eps, d_t > 0 and, for a coupled edge, d_t < r_sum.
  void validate(double r_sum) const;

  friend bool operator==(const InteractionParams&, const InteractionParams&) = default;
};

struct PairGeometry {
  double d = 0.0;      ///< corrected separation p*_j - p*_i
  double s_d = 1.0;    ///< sign(d), +1 at d == 0
  double c = 0.0;      ///< overlap d - s_d * r_sum
  double r_sum = 0.0;  ///< R_i + R_j
  double b = 0.0;      ///< (d_t + r_sum) / 2

  double abs_d() const noexcept { return s_d * d; }
};

/// Coupling indicator plus command bookkeeping for one pair.
struct PairState {
  bool f_en = false;
  bool uncouple_pending = false;
  /// Cleared by a commanded uncoupling; coupling cannot re-trigger until the
  /// pair has left the interaction radius.
  bool armed = true;
  std::optional<double> coupled_at;
  std::optional<double> uncoupled_at;

  friend bool operator==(const PairState&, const PairState&) = default;
};

/// State feedback expressed in position units: gains.feedback(x) / k_pos.
/// Throws ConfigError when k_pos is zero.
double corrected_position(const AgentState& state, const Gains& gains);

PairGeometry pair_geometry(double p_star_i, double p_star_j, double r_i, double r_j, double d_t);

/// Clamp to [-c_max, c_max].
double saturate(double u, double c_max) noexcept;

double force_repulsion(const PairGeometry& geom, const InteractionParams& params) noexcept;
double force_attraction(const PairGeometry& geom, const InteractionParams& params) noexcept;
double force_switching(const PairGeometry& geom, const PairState& pair,
                       const InteractionParams& params) noexcept;
double force_smooth_switching(const PairGeometry& geom, const PairState& pair,
                              const InteractionParams& params) noexcept;

/// Unsaturated coupled spring k1 * (d - s_d * d_t).
double coupled_law(const PairGeometry& geom, const InteractionParams& params) noexcept;
/// Unsaturated tent-shaped approach law of the smooth switching variant.
double smooth_approach_law(const PairGeometry& geom, const InteractionParams& params) noexcept;

/// Dispatches on params.variant.
double force(const PairGeometry& geom, const PairState& pair, const InteractionParams& params) noexcept;

/// Advances the coupling state machine.
///
/// Coupling fires when the pair is armed, not coupled, inside the interaction
/// radius, and ||d| - d_t| < eps. An active uncouple command is latched only
/// while coupled; the pair then releases at the next sample with
/// ||d| - d_t| < eps. Variants without coupling state never change the pair.
PairState update_pair(const PairState& pair, const PairGeometry& geom,
                      const InteractionParams& params, bool uncouple_cmd_active, double t);

}  // namespace tmem
