// Copyright 2026 The hingequad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: simulate, design, envelope, gains, config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hingequad/config.hpp"
#include "hingequad/hinge_bounds.hpp"
#include "hingequad/lqr_attitude.hpp"
#include "hingequad/scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

hq::AppConfig load(const std::string& path) {
  return path.empty() ? hq::AppConfig{} : hq::load_config(path);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json summary(const hq::ScenarioResult& res, std::uint64_t seed) {
  json j;
  j["scenario"] = std::string(hq::to_string(res.name));
  j["seed"] = seed;
  j["passed"] = res.passed();
  json verdicts = json::array();
  for (const auto& v : res.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  j["verdicts"] = verdicts;
  j["metrics"] = res.metrics;
  j["notes"] = res.notes;
  return j;
}

int simulate(const std::string& scenario, const std::string& config_path, const std::string& out_dir,
             std::uint64_t seed, bool enforce_fourfold) {
  hq::AppConfig cfg = load(config_path);
  if (enforce_fourfold) cfg.controller.enforce_fourfold_bounds = true;
  const hq::ScenarioName name = hq::scenario_from_string(scenario);
  const hq::ScenarioResult res = hq::run_scenario(name, cfg, {seed});

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (!res.log.empty()) {
    const bool csv = cfg.scenario.format == hq::LogFormat::Csv;
    std::ofstream log(dir / (csv ? "trajectory.csv" : "trajectory.jsonl"));
    res.log.write(log, cfg.scenario.format);
  }
  for (const auto& [file, text] : res.artifacts) write_file(dir / file, text);
  write_file(dir / "config.yaml", hq::dump_config(cfg));
  write_file(dir / "summary.json", summary(res, seed).dump(2) + "\n");

  for (const auto& v : res.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name;
    if (!v.detail.empty()) std::cout << ": " << v.detail;
    std::cout << '\n';
  }
  std::cout << scenario << ": " << (res.passed() ? "PASS" : "FAIL") << '\n';
  return res.passed() ? 0 : kExitFail;
}

int design(const std::string& config_path, const std::string& out_dir) {
  const hq::AppConfig cfg = load(config_path);
  const hq::DesignReport r = hq::design_report(cfg);
  const std::string text = hq::to_json(r);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "design_report.json", text);
  }
  std::cout << text;
  return r.feasibility.feasible ? 0 : kExitFail;
}

int envelope(const std::string& config_path, const std::string& out_dir, const std::string& configuration,
             double tau_x, double tau_y) {
  const hq::AppConfig cfg = load(config_path);
  const hq::Envelope env = hq::feasible_envelope(hq::configuration_from_string(configuration), cfg.vehicle,
                                                 Eigen::Vector2d(tau_x, tau_y));
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "envelope.csv");
  hq::write_envelope_csv(out, env);
  auto inside = [](const hq::Polygon& in, const hq::Polygon& outer) {
    for (const auto& v : in.vertices) {
      if (!outer.contains(v)) return false;
    }
    return true;
  };
  const bool ok = inside(env.c, env.b) && inside(env.b, env.a);
  std::cout << "vertices A/B/C: " << env.a.vertices.size() << '/' << env.b.vertices.size() << '/'
            << env.c.vertices.size() << "\ninclusion C in B in A: " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : kExitFail;
}

int gains(const std::string& config_path) {
  const hq::AppConfig cfg = load(config_path);
  json all = json::object();
  for (hq::Configuration c : hq::kSteadyConfigurations) {
    const hq::GainMatrix g = hq::synthesize_gains(c, cfg.vehicle, cfg.controller.lqr);
    json k = json::array();
    for (int r = 0; r < 3; ++r) {
      json row = json::array();
      for (int col = 0; col < 6; ++col) row.push_back(g.K(r, col));
      k.push_back(row);
    }
    json poles = json::array();
    for (int i = 0; i < 6; ++i) poles.push_back({g.poles(i).real(), g.poles(i).imag()});
    all[std::string(hq::to_string(c))] = {{"K", k}, {"poles", poles}, {"residual", g.residual}};
  }
  std::cout << all.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hinged-arm quadcopter design and simulation"};
  app.require_subcommand(1);

  std::string scenario, config_path, out_dir, configuration = "unfolded";
  std::uint64_t seed = 0;
  bool enforce = false;
  double tau_x = 0.0, tau_y = 0.0;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its log and verdicts");
  sim->add_option("--scenario", scenario, "Scenario name")->required();
  sim->add_option("--config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--seed", seed, "Seed for randomised initial conditions");
  sim->add_flag("--enforce-fourfold-bounds", enforce, "Apply the hinge bounds with all arms folded");

  auto* des = app.add_subcommand("design", "Arm-angle design and two-folded hover check");
  des->add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);
  des->add_option("--out", out_dir, "Output directory");

  auto* env = app.add_subcommand("envelope", "Feasible (f_sigma, tau_z) sets A, B, C as CSV");
  env->add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);
  env->add_option("--out", out_dir, "Output directory")->required();
  env->add_option("--configuration", configuration, "Steady configuration");
  env->add_option("--tau-x", tau_x, "Fixed roll torque, N m");
  env->add_option("--tau-y", tau_y, "Fixed pitch torque, N m");

  auto* gn = app.add_subcommand("gains", "LQR attitude gains for every steady configuration");
  gn->add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);

  auto* cf = app.add_subcommand("config", "Print the fully resolved configuration");
  cf->add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return simulate(scenario, config_path, out_dir, seed, enforce);
    if (des->parsed()) return design(config_path, out_dir);
    if (env->parsed()) return envelope(config_path, out_dir, configuration, tau_x, tau_y);
    if (gn->parsed()) return gains(config_path);
    if (cf->parsed()) {
      std::cout << hq::dump_config(load(config_path));
      return 0;
    }
  } catch (const hq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
