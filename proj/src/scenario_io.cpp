#include "tmem/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "tmem/errors.hpp"

namespace tmem {

// ---------------------------------------------------------------------------
// Scenario invariants
// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ParseError(key, rule);
}

void require_positive(double v, const std::string& key) {
  require(std::isfinite(v) && v > 0.0, key, fmt::format("must be finite and > 0 (got {})", v));
}

void require_finite(double v, const std::string& key) {
  require(std::isfinite(v), key, fmt::format("must be finite (got {})", v));
}

}  // namespace

void Scenario::validate() const {
  require_positive(plant.k_p, "plant.kp");
  require_positive(plant.k_d, "plant.kd");
  require_positive(plant.g, "plant.g");

  require(!(poles && gains), "gains", "explicit gains conflict with poles.*; give one or the other");
  require(poles || gains, "poles", "a pole specification (poles.*) or explicit gains (gains.*) is required");
  if (poles) {
    require_finite(poles->r_l, "poles.rl");
    require_finite(poles->im_l, "poles.iml");
    require_finite(poles->im_r, "poles.imr");
    require(poles->r_l >= 0.0, "poles.rl", fmt::format("must be >= 0 (got {})", poles->r_l));
    require(poles->im_r > 0.0, "poles.imr", fmt::format("must be > 0 (got {})", poles->im_r));
    require(poles->r_l != 0.0 || poles->im_l != 0.0, "poles.rl",
            "r_l and im_l both zero give a zero position gain");
  }
  if (gains) {
    require_finite(gains->k_pos, "gains.pos");
    require_finite(gains->k_vel, "gains.vel");
    require_finite(gains->k_tilt, "gains.tilt");
    require_finite(gains->k_rate, "gains.rate");
    require(gains->k_pos != 0.0, "gains.pos", "must be non-zero");
  }

  require_positive(dt, "sim.dt");
  require_positive(t_end, "sim.t_end");
  require(dt <= t_end, "sim.dt", "must not exceed sim.t_end");
  require(stride >= 1, "sim.stride", fmt::format("must be >= 1 (got {})", stride));

  require_positive(interaction.c_max, "interaction.c_max");
  require_positive(interaction.d_t, "interaction.d_t");
  require_positive(interaction.eps, "interaction.eps");
  if (interaction.k1) require_positive(*interaction.k1, "interaction.k1");

  require(!agents.empty(), "agent[0]", "at least one agent is required");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto key = [&](const char* f) { return fmt::format("agent[{}].{}", i, f); };
    const AgentSpec& a = agents[i];
    require_finite(a.initial.pos, key("pos"));
    require_finite(a.initial.vel, key("vel"));
    require_finite(a.initial.tilt, key("tilt"));
    require_finite(a.initial.tilt_rate, key("rate"));
    require_positive(a.radius, key("radius"));
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const auto key = [&](const char* f) { return fmt::format("edge[{}].{}", k, f); };
    require(e.a < agents.size(), key("a"), fmt::format("agent index {} out of range", e.a));
    require(e.b < agents.size(), key("b"), fmt::format("agent index {} out of range", e.b));
    require(e.a != e.b, key("b"), "an edge must join two distinct agents");
    require(seen.insert(std::minmax(e.a, e.b)).second, key("a"), "duplicate edge");
    const double r_sum = agents[e.a].radius + agents[e.b].radius;
    require(interaction.d_t < r_sum, "interaction.d_t",
            fmt::format("coupling distance must satisfy d_t < R_i + R_j (d_t = {}, R_i + R_j = {} on edge {})",
                        interaction.d_t, r_sum, k));
  }

  for (std::size_t m = 0; m < commands.size(); ++m) {
    const Command& c = commands[m];
    const auto key = [&](const char* f) { return fmt::format("command[{}].{}", m, f); };
    require(std::isfinite(c.t) && c.t >= 0.0 && c.t <= t_end, key("t"),
            fmt::format("must lie within [0, sim.t_end] (got {})", c.t));
    require(c.edge < edges.size(), key("edge"), fmt::format("edge index {} out of range", c.edge));
  }
}

Gains Scenario::resolved_gains() const {
  Gains g;
  if (gains) {
    g.k_pos = gains->k_pos;
    g.k_vel = gains->k_vel;
    g.k_tilt = gains->k_tilt;
    g.k_rate = gains->k_rate;
  } else if (poles) {
    g = place_gains(plant, poles_from_spec(*poles));
  } else {
    throw ParseError("poles", "a pole specification or explicit gains is required");
  }
  g.k1 = interaction.k1.value_or(g.k_pos);
  return g;
}

InteractionParams Scenario::edge_params() const {
  InteractionParams p;
  p.c_max = interaction.c_max;
  p.d_t = interaction.d_t;
  p.eps = interaction.eps;
  p.variant = interaction.variant;
  p.k1 = resolved_gains().k1;
  return p;
}

std::size_t Scenario::step_count() const {
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
}

Scenario default_scenario(Variant variant) {
  Scenario s;
  s.plant = {6.0, 25.0, 9.8};
  s.poles = PoleSpec{12.0, 0.1, 0.55};
  s.interaction.variant = variant;
  s.agents = {AgentSpec{{50.0, -1.5, 0.0, 0.0}, 20.0}, AgentSpec{{0.0, 3.0, 0.0, 0.0}, 20.0}};
  s.edges = {Edge{0, 1}};
  s.commands = {Command{29.0, CommandKind::Uncouple, 0}};
  return s;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

class KeyTable {
 public:
  explicit KeyTable(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(fmt::format("line {}", line_no), fmt::format("expected 'key = value', got '{}'", line));
      }
      const std::string key{trim(line.substr(0, eq))};
      const std::string value{trim(line.substr(eq + 1))};
      if (key.empty()) throw ParseError(fmt::format("line {}", line_no), "empty key");
      if (value.empty()) throw ParseError(key, "empty value");
      if (!entries_.emplace(key, Entry{value, line_no}).second) throw ParseError(key, "duplicate key");
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
  }

  std::optional<double> number(const std::string& key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    double out = 0.0;
    const char* first = v->data();
    const char* last = first + v->size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ParseError(key, fmt::format("'{}' is not a number", *v));
    return out;
  }

  double required_number(const std::string& key) {
    if (auto v = number(key)) return *v;
    throw ParseError(key, "missing required key");
  }

  std::optional<long long> integer(const std::string& key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    long long out = 0;
    const char* first = v->data();
    const char* last = first + v->size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ParseError(key, fmt::format("'{}' is not an integer", *v));
    return out;
  }

  std::size_t required_index(const std::string& key) {
    const auto v = integer(key);
    if (!v) throw ParseError(key, "missing required key");
    if (*v < 0) throw ParseError(key, "index must be >= 0");
    return static_cast<std::size_t>(*v);
  }

  /// Number of consecutive indices [0, n) present for `group[i].*`.
  std::size_t group_size(const std::string& group) const {
    const std::regex pattern("^" + group + R"(\[(\d+)\]\.[A-Za-z_]+$)");
    std::set<std::size_t> indices;
    for (const auto& [key, entry] : entries_) {
      std::smatch m;
      if (std::regex_match(key, m, pattern)) indices.insert(std::stoul(m[1].str()));
    }
    std::size_t expected = 0;
    for (std::size_t i : indices) {
      if (i != expected) {
        throw ParseError(fmt::format("{}[{}]", group, expected),
                         fmt::format("indices must be contiguous from 0 (found {}[{}])", group, i));
      }
      ++expected;
    }
    return expected;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_) {
      if (!used_.count(key)) throw ParseError(key, fmt::format("unknown key (line {})", entry.line));
    }
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

}  // namespace

Scenario parse_scenario(std::string_view text) {
  KeyTable kv(text);
  Scenario s;

  s.plant.k_p = kv.required_number("plant.kp");
  s.plant.k_d = kv.required_number("plant.kd");
  s.plant.g = kv.required_number("plant.g");

  const bool any_pole = kv.has("poles.rl") || kv.has("poles.iml") || kv.has("poles.imr");
  const bool any_gain = kv.has("gains.pos") || kv.has("gains.vel") || kv.has("gains.tilt") || kv.has("gains.rate");
  if (any_gain && any_pole) throw ParseError("gains", "explicit gains conflict with poles.*; give one or the other");
  if (any_gain) {
    s.gains = GainOverride{kv.required_number("gains.pos"), kv.required_number("gains.vel"),
                           kv.required_number("gains.tilt"), kv.required_number("gains.rate")};
  } else {
    s.poles = PoleSpec{kv.required_number("poles.rl"), kv.required_number("poles.iml"),
                       kv.required_number("poles.imr")};
  }

  s.dt = kv.number("sim.dt").value_or(0.001);
  s.t_end = kv.number("sim.t_end").value_or(40.0);
  if (const auto stride = kv.integer("sim.stride")) {
    if (*stride < 1 || *stride > 1'000'000'000) throw ParseError("sim.stride", "must be >= 1");
    s.stride = static_cast<int>(*stride);
  }

  const auto variant_name = kv.take("interaction.variant");
  if (!variant_name) throw ParseError("interaction.variant", "missing required key");
  const auto variant = parse_variant(*variant_name);
  if (!variant) {
    throw ParseError("interaction.variant",
                     fmt::format("unknown variant '{}' (expected repulsion, attraction, switching, "
                                 "smooth_switching, v10 or v11)",
                                 *variant_name));
  }
  s.interaction.variant = *variant;
  s.interaction.c_max = kv.number("interaction.c_max").value_or(0.05);
  s.interaction.d_t = kv.number("interaction.d_t").value_or(30.0);
  s.interaction.eps = kv.number("interaction.eps").value_or(0.1);
  s.interaction.k1 = kv.number("interaction.k1");

  const std::size_t n_agents = kv.group_size("agent");
  for (std::size_t i = 0; i < n_agents; ++i) {
    const auto key = [&](const char* f) { return fmt::format("agent[{}].{}", i, f); };
    AgentSpec a;
    a.initial.pos = kv.required_number(key("pos"));
    a.initial.vel = kv.required_number(key("vel"));
    a.initial.tilt = kv.number(key("tilt")).value_or(0.0);
    a.initial.tilt_rate = kv.number(key("rate")).value_or(0.0);
    a.radius = kv.required_number(key("radius"));
    s.agents.push_back(a);
  }

  const std::size_t n_edges = kv.group_size("edge");
  for (std::size_t k = 0; k < n_edges; ++k) {
    s.edges.push_back(Edge{kv.required_index(fmt::format("edge[{}].a", k)),
                           kv.required_index(fmt::format("edge[{}].b", k))});
  }

  const std::size_t n_commands = kv.group_size("command");
  for (std::size_t m = 0; m < n_commands; ++m) {
    const auto key = [&](const char* f) { return fmt::format("command[{}].{}", m, f); };
    Command c;
    c.t = kv.required_number(key("t"));
    const auto kind = kv.take(key("kind"));
    if (!kind) throw ParseError(key("kind"), "missing required key");
    if (*kind != "uncouple") throw ParseError(key("kind"), fmt::format("unknown command kind '{}' (expected uncouple)", *kind));
    c.kind = CommandKind::Uncouple;
    c.edge = kv.required_index(key("edge"));
    s.commands.push_back(c);
  }

  kv.reject_unused();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("path", fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::string out;
  auto put = [&](const std::string& key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  put("plant.kp", s.plant.k_p);
  put("plant.kd", s.plant.k_d);
  put("plant.g", s.plant.g);
  if (s.poles) {
    put("poles.rl", s.poles->r_l);
    put("poles.iml", s.poles->im_l);
    put("poles.imr", s.poles->im_r);
  }
  if (s.gains) {
    put("gains.pos", s.gains->k_pos);
    put("gains.vel", s.gains->k_vel);
    put("gains.tilt", s.gains->k_tilt);
    put("gains.rate", s.gains->k_rate);
  }
  put("sim.dt", s.dt);
  put("sim.t_end", s.t_end);
  put("sim.stride", s.stride);
  put("interaction.variant", to_string(s.interaction.variant));
  put("interaction.c_max", s.interaction.c_max);
  put("interaction.d_t", s.interaction.d_t);
  put("interaction.eps", s.interaction.eps);
  if (s.interaction.k1) put("interaction.k1", *s.interaction.k1);
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentSpec& a = s.agents[i];
    put(fmt::format("agent[{}].pos", i), a.initial.pos);
    put(fmt::format("agent[{}].vel", i), a.initial.vel);
    put(fmt::format("agent[{}].tilt", i), a.initial.tilt);
    put(fmt::format("agent[{}].rate", i), a.initial.tilt_rate);
    put(fmt::format("agent[{}].radius", i), a.radius);
  }
  for (std::size_t k = 0; k < s.edges.size(); ++k) {
    put(fmt::format("edge[{}].a", k), s.edges[k].a);
    put(fmt::format("edge[{}].b", k), s.edges[k].b);
  }
  for (std::size_t m = 0; m < s.commands.size(); ++m) {
    put(fmt::format("command[{}].t", m), s.commands[m].t);
    put(fmt::format("command[{}].kind", m), "uncouple");
    put(fmt::format("command[{}].edge", m), s.commands[m].edge);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string write_trace(const Trace& trace) {
  std::string out;
  out.reserve(trace.data.size() * 24 + 256);
  for (std::size_t c = 0; c < trace.width(); ++c) {
    if (c) out += ',';
    out += trace.columns[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    for (std::size_t c = 0; c < trace.width(); ++c) {
      if (c) out += ',';
      out += format_double(trace.at(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string format_events(const std::vector<Event>& events) {
  if (events.empty()) return "none";
  std::string out;
  for (const Event& e : events) {
    if (!out.empty()) out += ", ";
    out += fmt::format("{}@pair{}", e.t, e.pair);
  }
  return out;
}

}  // namespace

std::string write_report(const Metrics& m, const Scenario& scenario) {
  std::string out;
  auto put = [&](std::string_view key, const auto& value) { out += fmt::format("{}: {}\n", key, value); };
  put("rms_before", m.rms_before);
  put("rms_after", m.rms_after ? fmt::format("{}", *m.rms_after) : std::string("undefined"));
  put("delta_rms", m.delta_rms ? fmt::format("{}", *m.delta_rms) : std::string("undefined"));
  put("delta_rms_reason", m.delta_rms_reason.empty() ? std::string("none") : m.delta_rms_reason);
  put("coupling_events", format_events(m.coupling_events));
  put("uncoupling_events", format_events(m.uncoupling_events));
  put("velocity_sum_drift", m.velocity_sum_drift);
  put("max_abs_tilt", m.max_abs_tilt);
  put("small_angle_warning", m.small_angle_warning ? "true" : "false");

  const Gains g = scenario.resolved_gains();
  put("resolved.k_pos", g.k_pos);
  put("resolved.k_vel", g.k_vel);
  put("resolved.k_tilt", g.k_tilt);
  put("resolved.k_rate", g.k_rate);
  put("resolved.k1", g.k1);

  std::istringstream lines(serialize_scenario(scenario));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    out += line.substr(0, eq) + ": " + line.substr(eq + 3) + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing: {}", path.string(), std::strerror(errno)));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed: {}", path.string(), std::strerror(errno)));
}

}  // namespace tmem
