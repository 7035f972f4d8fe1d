#include "tmem/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "tmem/engine.hpp"
#include "tmem/errors.hpp"
#include "tmem/modal_control.hpp"
#include "tmem/scenario_io.hpp"

namespace tmem {

namespace {

namespace fs = std::filesystem;

std::string join_events(const std::vector<Event>& events) {
  std::string out;
  for (const Event& e : events) {
    if (!out.empty()) out += ';';
    out += fmt::format("{}", e.t);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_optional(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string("undefined");
}

// Runs jobs [0, n) on up to hardware_concurrency threads; results keep index order.
template <typename Result>
std::vector<Result> parallel_map(std::size_t n, const std::function<Result(std::size_t)>& job) {
  std::vector<Result> results(n);
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) results[i] = job(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

struct Outcome {
  enum class Status { Ok, Invalid, Abort } status = Status::Ok;
  std::string message;
  Metrics metrics;
};

Outcome run_guarded(const Scenario& scenario) {
  Outcome o;
  try {
    o.metrics = run(scenario).metrics;
  } catch (const SimulationAbort& e) {
    o.status = Outcome::Status::Abort;
    o.message = fmt::format("{} ({})", e.what(), e.diagnostics());
  } catch (const Error& e) {
    o.status = Outcome::Status::Invalid;
    o.message = e.what();
  }
  return o;
}

using Setter = std::function<void(Scenario&, double)>;

const std::map<std::string, Setter>& sweepable() {
  static const std::map<std::string, Setter> table = {
      {"interaction.c_max", [](Scenario& s, double v) { s.interaction.c_max = v; }},
      {"interaction.d_t", [](Scenario& s, double v) { s.interaction.d_t = v; }},
      {"interaction.eps", [](Scenario& s, double v) { s.interaction.eps = v; }},
      {"interaction.k1", [](Scenario& s, double v) { s.interaction.k1 = v; }},
      {"sim.dt", [](Scenario& s, double v) { s.dt = v; }},
      {"sim.t_end", [](Scenario& s, double v) { s.t_end = v; }},
      {"plant.kp", [](Scenario& s, double v) { s.plant.k_p = v; }},
      {"plant.kd", [](Scenario& s, double v) { s.plant.k_d = v; }},
      {"plant.g", [](Scenario& s, double v) { s.plant.g = v; }},
      {"poles.rl", [](Scenario& s, double v) { if (s.poles) s.poles->r_l = v; }},
      {"poles.iml", [](Scenario& s, double v) { if (s.poles) s.poles->im_l = v; }},
      {"poles.imr", [](Scenario& s, double v) { if (s.poles) s.poles->im_r = v; }},
  };
  return table;
}

const Setter* find_setter(const std::string& name) {
  const auto& table = sweepable();
  if (auto it = table.find(name); it != table.end()) return &it->second;
  // short form: "c_max" for "interaction.c_max"
  for (const auto& [key, setter] : table) {
    if (key.substr(key.find('.') + 1) == name) return &setter;
  }
  return nullptr;
}

int fail(std::ostream& err, int code, const std::string& msg) {
  err << "error: " << msg << '\n';
  return code;
}

// ---------------------------------------------------------------------------

struct GainsArgs {
  double kp = 6.0, kd = 25.0, g = 9.8, rl = 12.0, iml = 0.1, imr = 0.55;
};

int cmd_gains(const GainsArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const PlantParams plant{a.kp, a.kd, a.g};
    const PoleSet poles = poles_from_spec(PoleSpec{a.rl, a.iml, a.imr});
    const Gains k = place_gains(plant, poles);
    const Quartic desired = desired_polynomial(poles);
    const Quartic closed = closed_loop_polynomial(plant, k);
    const auto formula = symmetric_gain_formula(plant, poles);
    auto poly = [](const Quartic& q) {
      return fmt::format("{} {} {} {} {}", q[0], q[1], q[2], q[3], q[4]);
    };
    out << "control law: u = -(k_pos*P + k_vel*V + k_tilt*tilt + k_rate*rate)\n";
    out << fmt::format("k_pos: {}\nk_vel: {}\nk_tilt: {}\nk_rate: {}\nk1: {}\n", k.k_pos, k.k_vel, k.k_tilt, k.k_rate, k.k1);
    out << "desired_polynomial: " << poly(desired) << '\n';
    out << "closed_loop_polynomial: " << poly(closed) << '\n';
    out << fmt::format("residual: {:.3e}\n", relative_residual(closed, desired));
    out << fmt::format("symmetric_formula: {} {} {} {}\n", formula[0], formula[1], formula[2], formula[3]);
    out << "symmetric_formula_vs_placed: (k_vel, k_pos, 1 + k_tilt, k_rate)\n";
    return kExitOk;
  } catch (const SynthesisError& e) {
    return fail(err, kExitUsage, fmt::format("synthesis error: {}", e.what()));
  } catch (const Error& e) {
    return fail(err, kExitUsage, e.what());
  }
}

struct RunArgs {
  std::string scenario;
  std::string out_dir = "out";
  std::optional<double> dt;
  std::optional<double> t_end;
  std::string variant;
};

std::optional<Scenario> load_with_overrides(const std::string& path, const std::optional<double>& dt,
                                            const std::optional<double>& t_end, const std::string& variant,
                                            std::ostream& err, int& code) {
  try {
    Scenario s = load_scenario(path);
    if (dt) s.dt = *dt;
    if (t_end) s.t_end = *t_end;
    if (!variant.empty()) {
      const auto v = parse_variant(variant);
      if (!v) throw ParseError("--variant", fmt::format("unknown variant '{}'", variant));
      s.interaction.variant = *v;
    }
    s.validate();
    return s;
  } catch (const Error& e) {
    code = fail(err, kExitUsage, e.what());
    return std::nullopt;
  }
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  const auto scenario = load_with_overrides(a.scenario, a.dt, a.t_end, a.variant, err, code);
  if (!scenario) return code;
  RunResult result;
  try {
    result = run(*scenario);
  } catch (const SimulationAbort& e) {
    err << "diagnostics: " << e.diagnostics() << '\n';
    return fail(err, kExitAbort, fmt::format("simulation aborted: {}", e.what()));
  } catch (const Error& e) {
    return fail(err, kExitUsage, e.what());
  }
  try {
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    const std::string report = write_report(result.metrics, *scenario);
    write_text_file(dir / "trace.csv", write_trace(result.trace));
    write_text_file(dir / "report.txt", report);
    const std::string variant{to_string(scenario->interaction.variant)};
    write_text_file(dir / "velocities.svg",
                    render_svg(result.trace, velocity_view_columns(result.trace), "Velocities and RMS velocity, " + variant));
    if (!result.trace.pairs.empty()) {
      write_text_file(dir / "distance.svg",
                      render_svg(result.trace, distance_view_columns(result.trace), "Corrected pair distance, " + variant));
    }
    out << report;
  } catch (const std::exception& e) {
    return fail(err, kExitUsage, e.what());
  }
  return kExitOk;
}

struct CompareArgs {
  std::string scenario;
  std::string variants = "v10,v11";
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Variant> variants;
  std::stringstream list(a.variants);
  for (std::string name; std::getline(list, name, ',');) {
    const auto v = parse_variant(name);
    if (!v) return fail(err, kExitUsage, fmt::format("unknown variant '{}'", name));
    variants.push_back(*v);
  }
  if (variants.empty()) return fail(err, kExitUsage, "no variants given");
  int code = kExitOk;
  const auto base = load_with_overrides(a.scenario, std::nullopt, std::nullopt, "", err, code);
  if (!base) return code;

  const auto outcomes = parallel_map<Outcome>(variants.size(), [&](std::size_t i) {
    Scenario s = *base;
    s.interaction.variant = variants[i];
    return run_guarded(s);
  });

  out << fmt::format("{:<18} {:<8} {:<24} {:<24} {}\n", "variant", "coupled", "delta_rms", "coupling_events",
                     "uncoupling_events");
  int worst = kExitOk;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const Outcome& o = outcomes[i];
    const std::string name{to_string(variants[i])};
    if (o.status != Outcome::Status::Ok) {
      out << fmt::format("{:<18} error: {}\n", name, o.message);
      worst = std::max(worst, o.status == Outcome::Status::Abort ? kExitAbort : kExitUsage);
      continue;
    }
    const Metrics& m = o.metrics;
    out << fmt::format("{:<18} {:<8} {:<24} {:<24} {}\n", name, m.coupling_events.empty() ? "no" : "yes",
                       format_optional(m.delta_rms),
                       m.coupling_events.empty() ? "none" : join_events(m.coupling_events),
                       m.uncoupling_events.empty() ? "none" : join_events(m.uncoupling_events));
  }
  if (worst != kExitOk) return worst;
  if (variants.size() >= 2) {
    const auto& d0 = outcomes[0].metrics.delta_rms;
    const auto& d1 = outcomes[1].metrics.delta_rms;
    const std::string label = fmt::format("ratio delta_rms({})/delta_rms({})", to_string(variants[0]), to_string(variants[1]));
    if (d0 && d1 && *d1 > 0.0) {
      out << fmt::format("{}: {}\n", label, *d0 / *d1);
    } else {
      out << label << ": undefined\n";
    }
  }
  return kExitOk;
}

struct SweepArgs {
  std::string scenario;
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
  std::string variant;
  std::string out_file;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Setter* setter = find_setter(a.param);
  if (!setter) {
    std::string names;
    for (const auto& [key, s] : sweepable()) names += (names.empty() ? "" : ", ") + key;
    return fail(err, kExitUsage, fmt::format("parameter '{}' cannot be swept; choose one of: {}", a.param, names));
  }
  if (a.steps < 1) return fail(err, kExitUsage, "--steps must be >= 1");
  int code = kExitOk;
  const auto base = load_with_overrides(a.scenario, std::nullopt, std::nullopt, a.variant, err, code);
  if (!base) return code;

  const auto n = static_cast<std::size_t>(a.steps);
  auto value_at = [&](std::size_t i) {
    return n == 1 ? a.from : a.from + (a.to - a.from) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  const auto outcomes = parallel_map<Outcome>(n, [&](std::size_t i) {
    Scenario s = *base;
    (*setter)(s, value_at(i));
    return run_guarded(s);
  });

  std::string csv = "value,status,coupled,delta_rms,coupling_times,uncoupling_times\n";
  for (std::size_t i = 0; i < n; ++i) {
    const Outcome& o = outcomes[i];
    const Metrics& m = o.metrics;
    switch (o.status) {
      case Outcome::Status::Ok:
        csv += fmt::format("{},ok,{},{},{},{}\n", value_at(i), m.coupling_events.empty() ? 0 : 1,
                           format_optional(m.delta_rms), join_events(m.coupling_events),
                           join_events(m.uncoupling_events));
        break;
      case Outcome::Status::Invalid:
        csv += fmt::format("{},{},,,,\n", value_at(i), csv_field("invalid: " + o.message));
        break;
      case Outcome::Status::Abort:
        csv += fmt::format("{},{},,,,\n", value_at(i), csv_field("abort: " + o.message));
        break;
    }
  }
  if (a.out_file.empty()) {
    out << csv;
  } else {
    try {
      const fs::path p(a.out_file);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      write_text_file(p, csv);
    } catch (const std::exception& e) {
      return fail(err, kExitUsage, e.what());
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Swarm formation coupling simulator (thermal-motion-equivalent interaction laws)", "tmem"};
  app.require_subcommand(1);

  GainsArgs gains;
  auto* gains_cmd = app.add_subcommand("gains", "Synthesize modal feedback gains and verify the placed poles");
  gains_cmd->add_option("--kp", gains.kp, "angle-loop gain")->capture_default_str();
  gains_cmd->add_option("--kd", gains.kd, "rate-loop gain")->capture_default_str();
  gains_cmd->add_option("--g", gains.g, "gravitational acceleration")->capture_default_str();
  gains_cmd->add_option("--rl", gains.rl, "damped pair real part")->capture_default_str();
  gains_cmd->add_option("--iml", gains.iml, "damped pair imaginary part")->capture_default_str();
  gains_cmd->add_option("--imr", gains.imr, "undamped pair imaginary part")->capture_default_str();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write trace.csv, report.txt and SVG plots");
  run_cmd->add_option("scenario", run_args.scenario, "scenario file")->required();
  run_cmd->add_option("--out", run_args.out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--dt", run_args.dt, "override sim.dt");
  run_cmd->add_option("--t-end", run_args.t_end, "override sim.t_end");
  run_cmd->add_option("--variant", run_args.variant, "override interaction.variant");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Run one scenario under several interaction variants");
  cmp_cmd->add_option("scenario", cmp.scenario, "scenario file")->required();
  cmp_cmd->add_option("--variants", cmp.variants, "comma-separated variant list")->capture_default_str();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one scalar scenario parameter");
  sweep_cmd->add_option("scenario", sw.scenario, "scenario file")->required();
  sweep_cmd->add_option("--param", sw.param, "parameter key, e.g. interaction.c_max or c_max")->required();
  sweep_cmd->add_option("--from", sw.from, "first value")->required();
  sweep_cmd->add_option("--to", sw.to, "last value")->required();
  sweep_cmd->add_option("--steps", sw.steps, "number of values")->capture_default_str();
  sweep_cmd->add_option("--variant", sw.variant, "override interaction.variant");
  sweep_cmd->add_option("--out", sw.out_file, "write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << '\n' << sub->help();
    return kExitUsage;
  }

  if (*gains_cmd) return cmd_gains(gains, out, err);
  if (*run_cmd) return cmd_run(run_args, out, err);
  if (*cmp_cmd) return cmd_compare(cmp, out, err);
  return cmd_sweep(sw, out, err);
}

}  // namespace tmem
