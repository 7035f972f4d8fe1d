#include "tmem/interaction.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "tmem/errors.hpp"

namespace tmem {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Repulsion: return "repulsion";
    case Variant::Attraction: return "attraction";
    case Variant::Switching: return "switching";
    case Variant::SmoothSwitching: return "smooth_switching";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
  if (name == "repulsion") return Variant::Repulsion;
  if (name == "attraction") return Variant::Attraction;
  if (name == "switching" || name == "v10") return Variant::Switching;
  if (name == "smooth_switching" || name == "v11") return Variant::SmoothSwitching;
  return std::nullopt;
}

bool has_coupling_state(Variant v) noexcept {
  return v == Variant::Switching || v == Variant::SmoothSwitching;
}

void InteractionParams::validate(double r_sum) const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError(fmt::format("{} must be finite and > 0 (got {})", name, v));
    }
  };
  positive(c_max, "c_max");
  positive(eps, "eps");
  positive(d_t, "d_t");
  if (!std::isfinite(k1)) throw ConfigError("k1 must be finite");
  if (!(d_t < r_sum)) {
    throw ConfigError(
        fmt::format("d_t must be < R_i + R_j for a coupled pair (d_t = {}, R_i + R_j = {})", d_t, r_sum));
  }
}

double corrected_position(const AgentState& state, const Gains& gains) {
  if (gains.k_pos == 0.0) {
    throw ConfigError("corrected_position: k_pos must be non-zero");
  }
  return gains.feedback(state) / gains.k_pos;
}

PairGeometry pair_geometry(double p_star_i, double p_star_j, double r_i, double r_j, double d_t) {
  PairGeometry g;
  g.d = p_star_j - p_star_i;
  g.s_d = g.d < 0.0 ? -1.0 : 1.0;
  g.r_sum = r_i + r_j;
  g.c = g.d - g.s_d * g.r_sum;
  g.b = 0.5 * (d_t + g.r_sum);
  return g;
}

double saturate(double u, double c_max) noexcept { return std::clamp(u, -c_max, c_max); }

double coupled_law(const PairGeometry& geom, const InteractionParams& params) noexcept {
  return params.k1 * (geom.d - geom.s_d * params.d_t);
}

double smooth_approach_law(const PairGeometry& geom, const InteractionParams& params) noexcept {
  const double dist = geom.abs_d();
  if (dist >= geom.r_sum) return 0.0;
  if (dist > geom.b) return params.k1 * geom.c;
  if (dist >= params.d_t) return -coupled_law(geom, params);
  return coupled_law(geom, params);
}

double force_repulsion(const PairGeometry& geom, const InteractionParams& params) noexcept {
  if (geom.abs_d() >= geom.r_sum) return 0.0;
  return saturate(params.k1 * geom.c, params.c_max);
}

double force_attraction(const PairGeometry& geom, const InteractionParams& params) noexcept {
  if (geom.abs_d() >= geom.r_sum) return 0.0;
  return saturate(coupled_law(geom, params), params.c_max);
}

double force_switching(const PairGeometry& geom, const PairState& pair,
                       const InteractionParams& params) noexcept {
  if (pair.f_en) return saturate(coupled_law(geom, params), params.c_max);
  return force_repulsion(geom, params);
}

double force_smooth_switching(const PairGeometry& geom, const PairState& pair,
                              const InteractionParams& params) noexcept {
  if (pair.f_en) return saturate(coupled_law(geom, params), params.c_max);
  return saturate(smooth_approach_law(geom, params), params.c_max);
}

double force(const PairGeometry& geom, const PairState& pair, const InteractionParams& params) noexcept {
  switch (params.variant) {
    case Variant::Repulsion: return force_repulsion(geom, params);
    case Variant::Attraction: return force_attraction(geom, params);
    case Variant::Switching: return force_switching(geom, pair, params);
    case Variant::SmoothSwitching: return force_smooth_switching(geom, pair, params);
  }
  return 0.0;
}

PairState update_pair(const PairState& pair, const PairGeometry& geom,
                      const InteractionParams& params, bool uncouple_cmd_active, double t) {
  PairState next = pair;
  if (!has_coupling_state(params.variant)) return next;

  const double dist = geom.abs_d();
  const bool at_switch_point = std::abs(dist - params.d_t) < params.eps;

  if (uncouple_cmd_active && next.f_en) next.uncouple_pending = true;
  if (!next.armed && dist >= geom.r_sum) next.armed = true;

  if (!next.f_en) {
    if (next.armed && at_switch_point && dist < geom.r_sum) {
      next.f_en = true;
      next.coupled_at = t;
    }
  } else if (next.uncouple_pending && at_switch_point) {
    next.f_en = false;
    next.uncouple_pending = false;
    next.armed = false;
    next.uncoupled_at = t;
  }
  return next;
}

}  // namespace tmem
