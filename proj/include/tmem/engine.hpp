#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmem/interaction.hpp"
#include "tmem/modal_control.hpp"
#include "tmem/plant.hpp"
#include "tmem/scenario.hpp"

namespace tmem {

/// One interacting couple. Declared edges carry the scenario's variant;
/// every other couple uses plain repulsion and only acts inside the radius.
struct Coupling {
  std::size_t a = 0;
  std::size_t b = 0;
  bool declared = false;
  InteractionParams params;
  PairState state;
};

struct World {
  double t = 0.0;
  std::size_t step_index = 0;
  std::vector<AgentState> agents;
  std::vector<double> radii;
  /// Declared edges first, in scenario order, then the remaining couples.
  /// Every pair is stored with a < b.
  std::vector<Coupling> pairs;
  Gains gains;
  PlantParams plant;
  double dt = 0.001;
  double c_max = 0.05;  ///< clamp on each agent's summed command

  void validate() const;
};

World make_world(const Scenario& scenario);

enum class EventKind { Coupled, Uncoupled };

struct Event {
  double t = 0.0;
  std::size_t pair = 0;
  EventKind kind = EventKind::Coupled;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Commands and geometry sampled at the current world time.
struct ControlSample {
  std::vector<double> u;       ///< per-agent held command, rad
  std::vector<double> pair_d;  ///< per-pair corrected separation
  std::vector<Event> events;   ///< transitions fired while sampling
};

/// Corrected positions, pair geometry, coupling updates, one force evaluation
/// per couple applied as +F to a and -F to b, and the per-agent clamp.
/// `uncouple_pairs` lists pair indices whose uncouple command is active now.
ControlSample evaluate_controls(World& world, std::span<const std::size_t> uncouple_pairs = {});

/// RK4 for every agent under the held commands, then advances time.
/// Throws SimulationAbort if any state becomes non-finite.
void integrate(World& world, const ControlSample& controls);

/// evaluate_controls followed by integrate.
World step(World world, std::span<const std::size_t> uncouple_pairs = {});

struct PairInfo {
  std::size_t a = 0;
  std::size_t b = 0;
  bool declared = false;
  double r_sum = 0.0;
};

/// Sampled time series. Columns are
///   t, agent<i>_{pos,vel,tilt,rate,u} for each agent,
///   pair<k>_{d,fen} for each couple, rms.
struct Trace {
  std::size_t n_agents = 0;
  std::vector<PairInfo> pairs;
  double dt = 0.0;
  int stride = 1;
  std::vector<std::string> columns;
  std::vector<double> data;  ///< row-major
  std::vector<Event> events;

  std::size_t width() const noexcept { return columns.size(); }
  std::size_t rows() const noexcept { return width() == 0 ? 0 : data.size() / width(); }
  double at(std::size_t row, std::size_t col) const { return data[row * width() + col]; }
  double time(std::size_t row) const { return at(row, 0); }
  /// Throws ConfigError listing the available columns when `name` is unknown.
  std::size_t column_index(const std::string& name) const;

  static std::size_t agent_column(std::size_t agent, std::size_t field) noexcept {
    return 1 + 5 * agent + field;
  }
  std::size_t pair_column(std::size_t pair, std::size_t field) const noexcept {
    return 1 + 5 * n_agents + 2 * pair + field;
  }
  std::size_t rms_column() const noexcept { return width() - 1; }
};

/// Root mean square of the agent velocities; throws NumericDomainError on
/// an empty input.
double rms_velocity(std::span<const double> velocities);

struct RmsChange {
  std::optional<double> value;  ///< |after - before| / before
  double rms_before = 0.0;
  std::optional<double> rms_after;
  std::string reason;  ///< why value is empty
};

inline constexpr double kPreContactWindow = 0.5;  // s
inline constexpr double kSettledWindow = 1.0;     // s
inline constexpr double kSettledTilt = 1e-3;      // rad

/// Relative RMS-velocity change across the interaction.
///
/// Before: mean RMS over the last 0.5 s preceding the first sample at which any
/// couple overlaps (|d| < r_sum). After: mean RMS over the earliest 1 s window
/// following first contact in which every agent command is exactly 0 and every
/// |tilt| < 1e-3. A trace without any contact compares its first 0.5 s with the
/// earliest settled window.
RmsChange delta_rms(const Trace& trace);

struct Metrics {
  double rms_before = 0.0;
  std::optional<double> rms_after;
  std::optional<double> delta_rms;
  std::string delta_rms_reason;
  std::vector<Event> coupling_events;
  std::vector<Event> uncoupling_events;
  double velocity_sum_drift = 0.0;  ///< max_t |sum V(t) - sum V(0)| over every step
  double max_abs_tilt = 0.0;
  bool small_angle_warning = false;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
};

/// Validates the scenario, then simulates from t = 0 to t_end.
RunResult run(const Scenario& scenario);

}  // namespace tmem
