#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "berrydyn/errors.hpp"
#include "berrydyn/model.hpp"

namespace berrydyn {

using json = nlohmann::ordered_json;

enum class Scenario {
  reproduce_paper,
  symmetry_break,
  frequency_split,
  full_vs_effective,
  berry_loop,
  curvature_map,
  adiabatic_sweep,
};

inline const std::map<std::string, Scenario>& scenario_names() {
  static const std::map<std::string, Scenario> names = {
      {"reproduce_paper", Scenario::reproduce_paper},
      {"symmetry_break", Scenario::symmetry_break},
      {"frequency_split", Scenario::frequency_split},
      {"full_vs_effective", Scenario::full_vs_effective},
      {"berry_loop", Scenario::berry_loop},
      {"curvature_map", Scenario::curvature_map},
      {"adiabatic_sweep", Scenario::adiabatic_sweep},
  };
  return names;
}

inline std::string scenario_to_string(Scenario s) {
  for (const auto& [name, val] : scenario_names())
    if (val == s) return name;
  return "?";
}

// Initial conditions for the dynamics scenarios. Positions are in units of d;
// velocities in units of omega_ref * d where omega_ref is the slow circular
// rate used to calibrate the timescale ratio. Populations and phases refer to
// the field-aligned (+) and anti-aligned (-) spin bands, in that order.
struct InitialConditions {
  Vec2 position_d{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
  std::array<double, 2> populations{0.0, 1.0};
  std::array<double, 2> phases{0.0, 0.0};
  bool circular_orbit = false;
};

struct NumericsConfig {
  double timescale_ratio = 1000.0;  // omega_fast/omega_slow; 0 requests raw SI dynamics
  int steps_per_fast_period = 64;
  double duration_slow_periods = 1.0;
  int output_samples = 256;
  double probe_radius = 1.0e-9;  // m; field/curvature/frequency probes
  double loop_radius_d = 0.1;
  int grid_n = 64;
  double grid_extent_d = 3.0;
  std::vector<double> sweep_ratios{1e2, 1e3, 1e4};
};

struct ScenarioConfig {
  int schema_version = 1;
  Scenario scenario = Scenario::reproduce_paper;
  ModelParams model;  // defaults are the paper's parameter set
  TrapParams trap;    // artifact addition, off by default
  InitialConditions initial;
  NumericsConfig numerics;
  std::string output_dir = "out";
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const json& root) : root_(root) {}

  std::vector<std::string> errors;

  void unknown_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : known)
        if (it.key() == k) ok = true;
      if (!ok) errors.push_back(path + it.key() + ": unknown field");
    }
  }

  double number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
      errors.push_back(path + key + ": expected a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  int integer(const json& obj, const std::string& path, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
      errors.push_back(path + key + ": expected an integer");
      return fallback;
    }
    return obj[key].get<int>();
  }

  bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
      errors.push_back(path + key + ": expected a boolean");
      return fallback;
    }
    return obj[key].get<bool>();
  }

  Vec2 vec2(const json& obj, const std::string& path, const char* key, Vec2 fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      errors.push_back(path + key + ": expected an array of two numbers");
      return fallback;
    }
    return Vec2{v[0].get<double>(), v[1].get<double>()};
  }

  std::array<double, 2> pair(const json& obj, const std::string& path, const char* key,
                             std::array<double, 2> fallback) {
    const Vec2 v = vec2(obj, path, key, Vec2{fallback[0], fallback[1]});
    return {v.x, v.y};
  }

  const json& root_;
};

}  // namespace detail

// Parses and validates; returns the config plus every validation problem
// found (empty list means the config is usable).
inline std::pair<ScenarioConfig, std::vector<std::string>> parse_config(const json& root) {
  ScenarioConfig cfg;
  detail::ConfigReader r(root);

  if (!root.is_object()) {
    r.errors.push_back(": top level must be a JSON object");
    return {cfg, r.errors};
  }
  r.unknown_keys(root, "", {"schema_version", "scenario", "model", "trap", "initial", "numerics",
                            "output_dir"});

  cfg.schema_version = r.integer(root, "", "schema_version", 1);
  if (cfg.schema_version != 1) r.errors.push_back("schema_version: unsupported (expected 1)");

  if (!root.contains("scenario") || !root["scenario"].is_string()) {
    r.errors.push_back("scenario: required string field");
  } else {
    const std::string name = root["scenario"].get<std::string>();
    const auto it = scenario_names().find(name);
    if (it == scenario_names().end()) {
      std::string valid;
      for (const auto& [n, v] : scenario_names()) {
        if (!valid.empty()) valid += ", ";
        valid += n;
      }
      r.errors.push_back("scenario: unknown name '" + name + "' (valid: " + valid + ")");
    } else {
      cfg.scenario = it->second;
    }
  }

  if (root.contains("model")) {
    const json& m = root["model"];
    if (!m.is_object()) {
      r.errors.push_back("model: expected an object");
    } else {
      r.unknown_keys(m, "model.", {"mu0_mF", "mu", "d", "mass", "hbar"});
      cfg.model.mu0_mF = r.number(m, "model.", "mu0_mF", cfg.model.mu0_mF);
      cfg.model.mu = r.number(m, "model.", "mu", cfg.model.mu);
      cfg.model.d = r.number(m, "model.", "d", cfg.model.d);
      cfg.model.mass = r.number(m, "model.", "mass", cfg.model.mass);
      cfg.model.hbar = r.number(m, "model.", "hbar", cfg.model.hbar);
    }
  }
  for (const auto& e : cfg.model.validation_errors()) r.errors.push_back(e);

  if (root.contains("trap")) {
    const json& t = root["trap"];
    if (!t.is_object()) {
      r.errors.push_back("trap: expected an object");
    } else {
      r.unknown_keys(t, "trap.", {"enabled", "omega"});
      cfg.trap.enabled = r.boolean(t, "trap.", "enabled", false);
      cfg.trap.omega = r.number(t, "trap.", "omega", 0.0);
      if (!(cfg.trap.omega >= 0.0) || !std::isfinite(cfg.trap.omega)) {
        r.errors.push_back("trap.omega: must be >= 0 and finite");
      }
    }
  }

  // scenario-specific defaults for the dynamics initial conditions
  switch (cfg.scenario) {
    case Scenario::symmetry_break:
      cfg.initial.position_d = Vec2{0.0, 0.0};
      cfg.initial.velocity = Vec2{0.6, 0.0};
      break;
    case Scenario::full_vs_effective:
    case Scenario::adiabatic_sweep:
      cfg.initial.position_d = Vec2{0.5, 0.0};
      cfg.initial.circular_orbit = true;
      break;
    default:
      break;
  }

  if (root.contains("initial")) {
    const json& i = root["initial"];
    if (!i.is_object()) {
      r.errors.push_back("initial: expected an object");
    } else {
      r.unknown_keys(i, "initial.",
                     {"position", "velocity", "populations", "phases", "circular_orbit"});
      cfg.initial.position_d = r.vec2(i, "initial.", "position", cfg.initial.position_d);
      cfg.initial.velocity = r.vec2(i, "initial.", "velocity", cfg.initial.velocity);
      cfg.initial.populations = r.pair(i, "initial.", "populations", cfg.initial.populations);
      cfg.initial.phases = r.pair(i, "initial.", "phases", cfg.initial.phases);
      cfg.initial.circular_orbit = r.boolean(i, "initial.", "circular_orbit", cfg.initial.circular_orbit);
    }
  }
  {
    const auto& pop = cfg.initial.populations;
    if (!(pop[0] >= 0.0) || !(pop[1] >= 0.0)) {
      r.errors.push_back("initial.populations: must be non-negative");
    } else if (std::abs(pop[0] + pop[1] - 1.0) > 1e-6) {
      r.errors.push_back("initial.populations: must sum to 1 within 1e-6");
    } else {
      const double sum = pop[0] + pop[1];
      cfg.initial.populations = {pop[0] / sum, pop[1] / sum};
    }
    for (double v : {cfg.initial.position_d.x, cfg.initial.position_d.y, cfg.initial.velocity.x,
                     cfg.initial.velocity.y, cfg.initial.phases[0], cfg.initial.phases[1]}) {
      if (!std::isfinite(v)) {
        r.errors.push_back("initial: all fields must be finite");
        break;
      }
    }
  }

  if (root.contains("numerics")) {
    const json& n = root["numerics"];
    if (!n.is_object()) {
      r.errors.push_back("numerics: expected an object");
    } else {
      r.unknown_keys(n, "numerics.",
                     {"timescale_ratio", "steps_per_fast_period", "duration_slow_periods",
                      "output_samples", "probe_radius", "loop_radius_d", "grid_n", "grid_extent_d",
                      "sweep_ratios"});
      auto& c = cfg.numerics;
      c.timescale_ratio = r.number(n, "numerics.", "timescale_ratio", c.timescale_ratio);
      c.steps_per_fast_period = r.integer(n, "numerics.", "steps_per_fast_period", c.steps_per_fast_period);
      c.duration_slow_periods = r.number(n, "numerics.", "duration_slow_periods", c.duration_slow_periods);
      c.output_samples = r.integer(n, "numerics.", "output_samples", c.output_samples);
      c.probe_radius = r.number(n, "numerics.", "probe_radius", c.probe_radius);
      c.loop_radius_d = r.number(n, "numerics.", "loop_radius_d", c.loop_radius_d);
      c.grid_n = r.integer(n, "numerics.", "grid_n", c.grid_n);
      c.grid_extent_d = r.number(n, "numerics.", "grid_extent_d", c.grid_extent_d);
      if (n.contains("sweep_ratios")) {
        if (!n["sweep_ratios"].is_array() || n["sweep_ratios"].empty()) {
          r.errors.push_back("numerics.sweep_ratios: expected a non-empty array of numbers");
        } else {
          c.sweep_ratios.clear();
          for (const auto& v : n["sweep_ratios"]) {
            if (!v.is_number()) {
              r.errors.push_back("numerics.sweep_ratios: expected a non-empty array of numbers");
              break;
            }
            c.sweep_ratios.push_back(v.get<double>());
          }
        }
      }
    }
  }
  {
    const auto& c = cfg.numerics;
    if (!(c.timescale_ratio >= 0.0) || !std::isfinite(c.timescale_ratio))
      r.errors.push_back("numerics.timescale_ratio: must be >= 0 and finite (0 = raw SI)");
    if (c.steps_per_fast_period < 4)
      r.errors.push_back("numerics.steps_per_fast_period: must be >= 4");
    if (!(c.duration_slow_periods > 0.0) || !std::isfinite(c.duration_slow_periods))
      r.errors.push_back("numerics.duration_slow_periods: must be > 0 and finite");
    if (c.output_samples < 2) r.errors.push_back("numerics.output_samples: must be >= 2");
    if (!(c.probe_radius > 0.0)) r.errors.push_back("numerics.probe_radius: must be > 0");
    if (!(c.loop_radius_d > 0.0) || !(c.loop_radius_d <= 3.0))
      r.errors.push_back("numerics.loop_radius_d: must be in (0, 3]");
    if (c.grid_n < 2 || c.grid_n > 1024)
      r.errors.push_back("numerics.grid_n: must be in [2, 1024]");
    if (!(c.grid_extent_d > 0.0)) r.errors.push_back("numerics.grid_extent_d: must be > 0");
    for (std::size_t i = 0; i < c.sweep_ratios.size(); ++i) {
      if (!(c.sweep_ratios[i] > 0.0) ||
          (i > 0 && c.sweep_ratios[i] <= c.sweep_ratios[i - 1])) {
        r.errors.push_back("numerics.sweep_ratios: must be positive and strictly increasing");
        break;
      }
    }
  }

  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string() || root["output_dir"].get<std::string>().empty()) {
      r.errors.push_back("output_dir: expected a non-empty string");
    } else {
      cfg.output_dir = root["output_dir"].get<std::string>();
    }
  }

  return {cfg, r.errors};
}

inline std::pair<ScenarioConfig, std::vector<std::string>> parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("config does not parse as JSON: ") + e.what());
  }
  return parse_config(root);
}

// Loads, validates, and either returns a fully validated config or throws a
// ValidationError carrying every problem found.
inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto [cfg, errors] = parse_config_text(text);
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) {
      if (!msg.empty()) msg += "\n";
      msg += e;
    }
    throw ValidationError(msg);
  }
  return cfg;
}

// Full echo with defaults filled in; this is what the manifest records.
inline json config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["scenario"] = scenario_to_string(cfg.scenario);
  j["model"] = {{"mu0_mF", cfg.model.mu0_mF},
                {"mu", cfg.model.mu},
                {"d", cfg.model.d},
                {"mass", cfg.model.mass},
                {"hbar", cfg.model.hbar}};
  j["trap"] = {{"enabled", cfg.trap.enabled}, {"omega", cfg.trap.omega}};
  j["initial"] = {{"position", {cfg.initial.position_d.x, cfg.initial.position_d.y}},
                  {"velocity", {cfg.initial.velocity.x, cfg.initial.velocity.y}},
                  {"populations", {cfg.initial.populations[0], cfg.initial.populations[1]}},
                  {"phases", {cfg.initial.phases[0], cfg.initial.phases[1]}},
                  {"circular_orbit", cfg.initial.circular_orbit}};
  j["numerics"] = {{"timescale_ratio", cfg.numerics.timescale_ratio},
                   {"steps_per_fast_period", cfg.numerics.steps_per_fast_period},
                   {"duration_slow_periods", cfg.numerics.duration_slow_periods},
                   {"output_samples", cfg.numerics.output_samples},
                   {"probe_radius", cfg.numerics.probe_radius},
                   {"loop_radius_d", cfg.numerics.loop_radius_d},
                   {"grid_n", cfg.numerics.grid_n},
                   {"grid_extent_d", cfg.numerics.grid_extent_d},
                   {"sweep_ratios", cfg.numerics.sweep_ratios}};
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace berrydyn
