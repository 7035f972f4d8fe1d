#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tmem/interaction.hpp"
#include "tmem/modal_control.hpp"
#include "tmem/plant.hpp"

namespace tmem {

struct AgentSpec {
  AgentState initial;
  double radius = 20.0;  ///< interaction radius R, m

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// A declared formation edge between agents a and b (a != b).
struct Edge {
  std::size_t a = 0;
  std::size_t b = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class CommandKind { Uncouple };

struct Command {
  double t = 0.0;
  CommandKind kind = CommandKind::Uncouple;
  std::size_t edge = 0;

  friend bool operator==(const Command&, const Command&) = default;
};

/// Explicit feedback gains, used instead of a pole specification.
struct GainOverride {
  double k_pos = 0.0;
  double k_vel = 0.0;
  double k_tilt = 0.0;
  double k_rate = 0.0;

  friend bool operator==(const GainOverride&, const GainOverride&) = default;
};

struct InteractionSettings {
  Variant variant = Variant::SmoothSwitching;
  double c_max = 0.05;
  double d_t = 30.0;
  double eps = 0.1;
  std::optional<double> k1;  ///< defaults to k_pos

  friend bool operator==(const InteractionSettings&, const InteractionSettings&) = default;
};

struct Scenario {
  PlantParams plant;
  std::optional<PoleSpec> poles;
  std::optional<GainOverride> gains;
  InteractionSettings interaction;
  std::vector<AgentSpec> agents;
  std::vector<Edge> edges;
  std::vector<Command> commands;
  double dt = 0.001;
  double t_end = 40.0;
  int stride = 10;

  /// Re-checks every invariant; throws ParseError naming the offending key.
  void validate() const;

  /// Gains from the pole spec (or the explicit override) with k1 resolved.
  Gains resolved_gains() const;
  InteractionParams edge_params() const;
  /// Number of integration steps, floor(t_end / dt) with a rounding guard.
  std::size_t step_count() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// The two-agent setup with the modelling parameters and initial conditions of
/// the reference experiments: kp=6, kd=25, g=9.8, poles -12+/-0.1i, +/-0.55i,
/// R=20, agents at 50 m and 0 m moving at -1.5 and 3 m/s, one edge, and an
/// uncouple command at 29 s.
Scenario default_scenario(Variant variant = Variant::SmoothSwitching);

}  // namespace tmem
