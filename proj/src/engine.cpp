#include "tmem/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "tmem/errors.hpp"

namespace tmem {

void World::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("world: dt must be finite and > 0");
  if (radii.size() != agents.size()) throw ConfigError("world: one radius per agent required");
  for (const Coupling& p : pairs) {
    if (p.a >= agents.size() || p.b >= agents.size() || p.a == p.b) {
      throw ConfigError(fmt::format("world: pair ({}, {}) does not reference two distinct agents", p.a, p.b));
    }
  }
}

World make_world(const Scenario& scenario) {
  scenario.validate();
  World w;
  w.plant = scenario.plant;
  w.gains = scenario.resolved_gains();
  w.dt = scenario.dt;
  w.c_max = scenario.interaction.c_max;
  for (const AgentSpec& a : scenario.agents) {
    w.agents.push_back(a.initial);
    w.radii.push_back(a.radius);
  }

  const InteractionParams edge_params = scenario.edge_params();
  InteractionParams avoid = edge_params;
  avoid.variant = Variant::Repulsion;

  auto declared = [&](std::size_t i, std::size_t j) {
    return std::any_of(scenario.edges.begin(), scenario.edges.end(), [&](const Edge& e) {
      return (e.a == i && e.b == j) || (e.a == j && e.b == i);
    });
  };
  for (const Edge& e : scenario.edges) {
    w.pairs.push_back({std::min(e.a, e.b), std::max(e.a, e.b), true, edge_params, {}});
  }
  const std::size_t n = w.agents.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!declared(i, j)) w.pairs.push_back({i, j, false, avoid, {}});
    }
  }
  w.validate();
  return w;
}

ControlSample evaluate_controls(World& world, std::span<const std::size_t> uncouple_pairs) {
  const std::size_t n = world.agents.size();
  std::vector<double> p_star(n);
  for (std::size_t i = 0; i < n; ++i) p_star[i] = corrected_position(world.agents[i], world.gains);

  ControlSample out;
  out.u.assign(n, 0.0);
  out.pair_d.resize(world.pairs.size());
  for (std::size_t k = 0; k < world.pairs.size(); ++k) {
    Coupling& pair = world.pairs[k];
    const PairGeometry geom = pair_geometry(p_star[pair.a], p_star[pair.b], world.radii[pair.a],
                                            world.radii[pair.b], pair.params.d_t);
    const bool cmd = std::find(uncouple_pairs.begin(), uncouple_pairs.end(), k) != uncouple_pairs.end();
    const PairState next = update_pair(pair.state, geom, pair.params, cmd, world.t);
    if (next.f_en != pair.state.f_en) {
      out.events.push_back({world.t, k, next.f_en ? EventKind::Coupled : EventKind::Uncoupled});
    }
    pair.state = next;

    const double f = force(geom, pair.state, pair.params);
    out.u[pair.a] += f;
    out.u[pair.b] -= f;
    out.pair_d[k] = geom.d;
  }
  for (double& u : out.u) {
    u = saturate(u, world.c_max);
    if (!std::isfinite(u)) {
      throw SimulationAbort("non-finite command", fmt::format("t={} step={}", world.t, world.step_index));
    }
  }
  return out;
}

void integrate(World& world, const ControlSample& controls) {
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const AgentState& s = world.agents[i];
    AgentState next = s;
    bool finite = true;
    try {
      next = rk4_step(s, controls.u[i], world.dt, world.plant);
      finite = next.is_finite();
    } catch (const NumericDomainError&) {
      finite = false;
    }
    if (!finite) {
      throw SimulationAbort(
          fmt::format("agent {} left the finite range at t = {}", i, world.t),
          fmt::format("t={} step={} agent={} pos={} vel={} tilt={} rate={} u={}", world.t,
                      world.step_index, i, s.pos, s.vel, s.tilt, s.tilt_rate, controls.u[i]));
    }
    world.agents[i] = next;
  }
  ++world.step_index;
  world.t = static_cast<double>(world.step_index) * world.dt;
}

World step(World world, std::span<const std::size_t> uncouple_pairs) {
  const ControlSample c = evaluate_controls(world, uncouple_pairs);
  integrate(world, c);
  return world;
}

std::size_t Trace::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    std::string list;
    for (const auto& c : columns) list += (list.empty() ? "" : ", ") + c;
    throw ConfigError(fmt::format("unknown column '{}'; available: {}", name, list));
  }
  return static_cast<std::size_t>(it - columns.begin());
}

double rms_velocity(std::span<const double> velocities) {
  if (velocities.empty()) throw NumericDomainError("rms_velocity: empty velocity set");
  double sum = 0.0;
  for (double v : velocities) sum += v * v;
  return std::sqrt(sum / static_cast<double>(velocities.size()));
}

RmsChange delta_rms(const Trace& trace) {
  RmsChange out;
  const std::size_t rows = trace.rows();
  if (rows == 0) {
    out.reason = "empty trace";
    return out;
  }
  const double sample_dt = trace.dt * trace.stride;
  const auto pre_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kPreContactWindow / sample_dt)));
  const auto post_len = static_cast<std::size_t>(std::lround(kSettledWindow / sample_dt)) + 1;
  const std::size_t rms_col = trace.rms_column();

  auto in_contact = [&](std::size_t r) {
    for (std::size_t k = 0; k < trace.pairs.size(); ++k) {
      if (std::abs(trace.at(r, trace.pair_column(k, 0))) < trace.pairs[k].r_sum) return true;
    }
    return false;
  };
  auto settled = [&](std::size_t r) {
    for (std::size_t i = 0; i < trace.n_agents; ++i) {
      if (trace.at(r, Trace::agent_column(i, 4)) != 0.0) return false;
      if (!(std::abs(trace.at(r, Trace::agent_column(i, 2))) < kSettledTilt)) return false;
    }
    return true;
  };
  auto mean_rms = [&](std::size_t first, std::size_t count) {
    double s = 0.0;
    for (std::size_t r = first; r < first + count; ++r) s += trace.at(r, rms_col);
    return s / static_cast<double>(count);
  };

  std::size_t contact = 0;
  while (contact < rows && !in_contact(contact)) ++contact;
  std::size_t search_from = contact;
  if (contact == rows) {
    // no interaction at all
    out.rms_before = mean_rms(0, std::min(pre_len, rows));
    search_from = 0;
  } else if (contact == 0) {
    out.reason = "couples already overlap at t = 0; no pre-contact window";
    return out;
  } else {
    const std::size_t first = contact > pre_len ? contact - pre_len : 0;
    out.rms_before = mean_rms(first, contact - first);
  }

  std::size_t run_length = 0;
  for (std::size_t r = search_from; r < rows; ++r) {
    run_length = settled(r) ? run_length + 1 : 0;
    if (run_length >= post_len) {
      out.rms_after = mean_rms(r + 1 - post_len, post_len);
      break;
    }
  }
  if (!out.rms_after) {
    out.reason = "no settled 1 s window (all commands 0, |tilt| < 1e-3) after first contact";
    return out;
  }
  if (out.rms_before > 0.0) {
    out.value = std::abs(*out.rms_after - out.rms_before) / out.rms_before;
  } else {
    out.reason = "RMS velocity before contact is zero";
  }
  return out;
}

namespace {

Trace make_trace_layout(const World& w, const Scenario& s) {
  Trace tr;
  tr.n_agents = w.agents.size();
  tr.dt = s.dt;
  tr.stride = s.stride;
  tr.columns.push_back("t");
  for (std::size_t i = 0; i < tr.n_agents; ++i) {
    for (const char* f : {"pos", "vel", "tilt", "rate", "u"}) {
      tr.columns.push_back(fmt::format("agent{}_{}", i, f));
    }
  }
  for (std::size_t k = 0; k < w.pairs.size(); ++k) {
    const Coupling& p = w.pairs[k];
    tr.pairs.push_back({p.a, p.b, p.declared, w.radii[p.a] + w.radii[p.b]});
    tr.columns.push_back(fmt::format("pair{}_d", k));
    tr.columns.push_back(fmt::format("pair{}_fen", k));
  }
  tr.columns.push_back("rms");
  return tr;
}

}  // namespace

RunResult run(const Scenario& scenario) {
  World world = make_world(scenario);
  const std::size_t n_steps = scenario.step_count();

  std::vector<std::pair<std::size_t, std::size_t>> schedule;  // (step, pair index)
  for (const Command& c : scenario.commands) {
    const double exact = c.t / scenario.dt;
    auto at = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    schedule.emplace_back(at, c.edge);
  }
  std::sort(schedule.begin(), schedule.end());

  RunResult result;
  Trace& trace = result.trace;
  trace = make_trace_layout(world, scenario);
  trace.data.reserve((n_steps / scenario.stride + 1) * trace.width());

  Metrics& m = result.metrics;
  double v_sum0 = 0.0;
  for (const AgentState& a : world.agents) v_sum0 += a.vel;

  std::vector<double> vel(world.agents.size());
  std::vector<std::size_t> active;
  auto next_cmd = schedule.begin();
  for (std::size_t k = 0;; ++k) {
    active.clear();
    while (next_cmd != schedule.end() && next_cmd->first <= k) active.push_back((next_cmd++)->second);

    const ControlSample controls = evaluate_controls(world, active);
    for (const Event& e : controls.events) {
      trace.events.push_back(e);
      (e.kind == EventKind::Coupled ? m.coupling_events : m.uncoupling_events).push_back(e);
    }

    double v_sum = 0.0;
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
      const AgentState& a = world.agents[i];
      vel[i] = a.vel;
      v_sum += a.vel;
      m.max_abs_tilt = std::max(m.max_abs_tilt, std::abs(a.tilt));
    }
    m.velocity_sum_drift = std::max(m.velocity_sum_drift, std::abs(v_sum - v_sum0));

    if (k % static_cast<std::size_t>(scenario.stride) == 0) {
      trace.data.push_back(world.t);
      for (std::size_t i = 0; i < world.agents.size(); ++i) {
        const AgentState& a = world.agents[i];
        trace.data.insert(trace.data.end(), {a.pos, a.vel, a.tilt, a.tilt_rate, controls.u[i]});
      }
      for (std::size_t p = 0; p < world.pairs.size(); ++p) {
        trace.data.push_back(controls.pair_d[p]);
        trace.data.push_back(world.pairs[p].state.f_en ? 1.0 : 0.0);
      }
      trace.data.push_back(rms_velocity(vel));
    }
    if (k == n_steps) break;
    integrate(world, controls);
  }

  m.small_angle_warning = m.max_abs_tilt > kSmallAngleLimit;
  const RmsChange change = delta_rms(trace);
  m.rms_before = change.rms_before;
  m.rms_after = change.rms_after;
  m.delta_rms = change.value;
  m.delta_rms_reason = change.reason;
  return result;
}

}  // namespace tmem
