#include <catch2/catch_amalgamated.hpp>

#include "berrydyn/config.hpp"

using namespace berrydyn;
using Catch::Approx;

TEST_CASE("minimal config fills the paper defaults") {
  auto [cfg, errors] = parse_config_text(R"({"scenario": "reproduce_paper"})");
  REQUIRE(errors.empty());
  CHECK(cfg.scenario == Scenario::reproduce_paper);
  CHECK(cfg.model.mu0_mF == 2.0e-21);
  CHECK(cfg.model.d == 1.0e-6);
  CHECK(cfg.model.mass == 2.5e-15);
  CHECK(cfg.model.hbar == Approx(1.0545718e-34));
  CHECK(cfg.model.mu < 0.0);
  CHECK(cfg.numerics.probe_radius == 1.0e-9);
  CHECK(cfg.initial.populations[0] == 0.0);
  CHECK(cfg.initial.populations[1] == 1.0);
  CHECK(cfg.trap.enabled == false);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("negative mass is reported with its field path") {
  auto [cfg, errors] =
      parse_config_text(R"({"scenario": "reproduce_paper", "model": {"mass": -1.0}})");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("model.mass") != std::string::npos);
}

TEST_CASE("unknown scenario names list the valid ones") {
  auto [cfg, errors] = parse_config_text(R"({"scenario": "warp_drive"})");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("warp_drive") != std::string::npos);
  for (const char* name : {"reproduce_paper", "symmetry_break", "frequency_split",
                           "full_vs_effective", "berry_loop", "curvature_map", "adiabatic_sweep"}) {
    CHECK(errors[0].find(name) != std::string::npos);
  }
}

TEST_CASE("all validation problems are collected, not just the first") {
  auto [cfg, errors] = parse_config_text(R"({
    "scenario": "symmetry_break",
    "model": {"mass": -1.0, "d": 0.0},
    "numerics": {"output_samples": 1, "probe_radius": -2.0},
    "initial": {"populations": [0.7, 0.6]}
  })");
  CHECK(errors.size() == 5);
}

TEST_CASE("unknown fields are flagged with their paths") {
  auto [cfg, errors] = parse_config_text(R"({
    "scenario": "reproduce_paper",
    "model": {"mu_typo": 1.0},
    "frobnicate": true
  })");
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].find("frobnicate") != std::string::npos);
  CHECK(errors[1].find("model.mu_typo") != std::string::npos);
}

TEST_CASE("text that is not JSON raises a parse error") {
  CHECK_THROWS_AS(parse_config_text("scenario = reproduce"), ParseError);
}

TEST_CASE("scenario-specific initial-condition defaults") {
  {
    auto [cfg, errors] = parse_config_text(R"({"scenario": "symmetry_break"})");
    REQUIRE(errors.empty());
    CHECK(cfg.initial.position_d.x == 0.0);
    CHECK(cfg.initial.velocity.x == 0.6);
    CHECK(!cfg.initial.circular_orbit);
  }
  {
    auto [cfg, errors] = parse_config_text(R"({"scenario": "full_vs_effective"})");
    REQUIRE(errors.empty());
    CHECK(cfg.initial.position_d.x == 0.5);
    CHECK(cfg.initial.circular_orbit);
  }
}

TEST_CASE("overrides survive the round trip into the manifest echo") {
  auto [cfg, errors] = parse_config_text(R"({
    "scenario": "berry_loop",
    "model": {"mu": 9.3e-24},
    "numerics": {"loop_radius_d": 0.25},
    "output_dir": "artifacts"
  })");
  REQUIRE(errors.empty());
  const json echo = config_to_json(cfg);
  CHECK(echo["model"]["mu"].get<double>() == 9.3e-24);
  CHECK(echo["numerics"]["loop_radius_d"].get<double>() == 0.25);
  CHECK(echo["output_dir"].get<std::string>() == "artifacts");
  CHECK(echo["scenario"].get<std::string>() == "berry_loop");
}

TEST_CASE("schema version is enforced") {
  auto [cfg, errors] = parse_config_text(R"({"scenario": "reproduce_paper", "schema_version": 2})");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("schema_version") != std::string::npos);
}
