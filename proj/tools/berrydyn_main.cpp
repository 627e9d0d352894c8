// Command-line front end: scenario execution with deterministic CSV/JSON
// artifacts plus the one-command reproduction suite.
//
// Exit codes: 0 all checks pass, 1 any check fails, 2 config/IO error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "berrydyn/berrydyn.hpp"

namespace {

std::filesystem::path resolve_out_dir(const std::string& cli_out, const std::string& cfg_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("BERRYDYN_OUT"); env && *env) return env;
  return cfg_out;
}

int execute(const berrydyn::ScenarioConfig& cfg, const std::string& cli_out) {
  const auto out_dir = resolve_out_dir(cli_out, cfg.output_dir);
  const berrydyn::RunManifest manifest = berrydyn::run_scenario(cfg, out_dir);
  for (const auto& c : manifest.checks) {
    std::cout << (c.status == "pass" ? "[PASS] " : "[FAIL] ") << c.name;
    if (std::isfinite(c.measured)) std::cout << "  measured=" << c.measured;
    if (std::isfinite(c.expected)) std::cout << " expected=" << c.expected;
    if (c.status != "pass" && c.status != "fail") std::cout << "  (" << c.status << ")";
    if (!c.detail.empty()) std::cout << "  -- " << c.detail;
    std::cout << '\n';
  }
  std::cout << (manifest.all_passed() ? "all checks passed" : "some checks did not pass")
            << "; manifest: " << (out_dir / "manifest.json").string() << '\n';
  return manifest.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid quantum-classical dynamics with geometric-force analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string validate_path;

  CLI::App* run = app.add_subcommand("run", "execute the scenario in a config file");
  run->add_option("config", config_path, "path to a JSON scenario config")->required();
  run->add_option("--out", out_dir, "output directory (overrides config and BERRYDYN_OUT)");

  CLI::App* reproduce =
      app.add_subcommand("reproduce", "run the paper-reproduction suite with built-in defaults");
  reproduce->add_option("--out", out_dir, "output directory (overrides BERRYDYN_OUT)");

  CLI::App* validate = app.add_subcommand("validate", "validate a config file and report problems");
  validate->add_option("config", validate_path, "path to a JSON scenario config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return execute(berrydyn::load_config(config_path), out_dir);
    }
    if (reproduce->parsed()) {
      berrydyn::ScenarioConfig cfg;
      cfg.scenario = berrydyn::Scenario::reproduce_paper;
      return execute(cfg, out_dir);
    }
    if (validate->parsed()) {
      std::ifstream in(validate_path);
      if (!in) throw berrydyn::ParseError("cannot open config file " + validate_path);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      auto [cfg, errors] = berrydyn::parse_config_text(text);
      if (errors.empty()) {
        std::cout << "config is valid (scenario: " << berrydyn::scenario_to_string(cfg.scenario)
                  << ")\n";
        return 0;
      }
      for (const auto& e : errors) std::cerr << "error: " << e << '\n';
      return 2;
    }
  } catch (const berrydyn::SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
