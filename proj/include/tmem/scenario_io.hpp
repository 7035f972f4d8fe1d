#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tmem/engine.hpp"
#include "tmem/scenario.hpp"

namespace tmem {

/// Parses `key = value` lines (`#` starts a comment). Recognized keys:
///
///   plant.{kp,kd,g}                      required
///   poles.{rl,iml,imr}                   required unless gains.* is given
///   gains.{pos,vel,tilt,rate}            all four, instead of poles.*
///   sim.{dt,t_end,stride}                default 0.001, 40, 10
///   interaction.variant                  required
///   interaction.{c_max,d_t,eps}          default 0.05, 30, 0.1
///   interaction.k1                       default k_pos
///   agent[i].{pos,vel,radius}            required
///   agent[i].{tilt,rate}                 default 0
///   edge[k].{a,b}
///   command[m].{t,kind,edge}             kind: uncouple
///
/// Indices must be contiguous from 0. Throws ParseError naming the key.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a file; an unreadable path is reported as a ParseError on
/// the key "path".
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// CSV with a header row and 17 significant digits per value.
std::string write_trace(const Trace& trace);

/// `key: value` lines in a fixed order: metrics first, then the resolved
/// scenario parameters under their scenario keys.
std::string write_report(const Metrics& metrics, const Scenario& scenario);

/// Line chart of the named trace columns against time, with a legend and a
/// vertical marker at every coupling event. Throws ConfigError for an empty
/// selection or an unknown column (the message lists the available ones).
std::string render_svg(const Trace& trace, const std::vector<std::string>& columns,
                       std::string_view title = {});

/// Column selections for the two standard views.
std::vector<std::string> velocity_view_columns(const Trace& trace);
std::vector<std::string> distance_view_columns(const Trace& trace);

/// Writes `text` to `path`, throwing Error with the OS reason on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// %.17g
std::string format_double(double v);

}  // namespace tmem
