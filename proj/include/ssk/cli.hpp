#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ssk/harness.hpp"

#ifndef SSK_VERSION
#define SSK_VERSION "0.1.0"
#endif

namespace ssk {

inline constexpr const char* kVersion = SSK_VERSION;

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline Json manifest(const ScenarioConfig& c, const std::string& command) {
  Json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = c.seed;
  m["config"] = c.resolved;
  return m;
}

inline std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

inline int run_simulate(const ScenarioConfig& c, const std::filesystem::path& out) {
  with_scenario(c, [&](const auto& sc) {
    sc.spec.validate();
    constexpr int N = std::decay_t<decltype(sc.x0)>::RowsAtCompileTime;
    const auto& h = sc.spec.h;
    for (int i = 0; i < sc.trajectories; ++i) {
      const auto idx = static_cast<std::uint32_t>(i);
      auto controller = CertificateController(sc);
      State<N> x0;
      x0.values = initial_state(sc, idx);
      const auto traj = simulate(sc.model, controller, x0, sc.horizon, sc.dt, NoiseStream{sc.seed, idx, 0},
                                 sc.stop_on_exit, [&h](const auto& x) { return h.value(x) > 0.0; });
      char name[32];
      std::snprintf(name, sizeof name, "traj_%05d.csv", i);
      emit_trajectory_csv(traj, h, (out / name).string());
    }
    return 0;
  });
  write_text(out / "manifest.json", manifest(c, "simulate").dump(2) + "\n");
  std::cout << "wrote " << c.trajectories << " trajectories to " << out.string() << "\n";
  return 0;
}

inline int run_estimate(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto r = run_ensemble(c);
  Json j = manifest(c, "estimate");
  j["report"] = to_json(r);
  write_text(out / "report.json", j.dump(2) + "\n");
  char buf[200];
  std::snprintf(buf, sizeof buf, "P(safe) = %.4f  (%ld/%ld, 95%% CI [%.4f, %.4f])\n", r.empirical_probability,
                r.safe_count, r.trajectories, r.wilson_interval_95.first, r.wilson_interval_95.second);
  std::cout << buf;
  if (r.theoretical_bound.bound) std::cout << "bound   = " << format_double(*r.theoretical_bound.bound) << "\n";
  return 0;
}

inline int run_bounds(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto t = bounds_table(c);
  std::cout << format_bounds_table(t);
  Json j = manifest(c, "bounds");
  j["bounds"] = to_json(t);
  write_text(out / "bounds.json", j.dump(2) + "\n");
  return 0;
}

inline int run_compare(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto r = compare_saturation(c);
  std::cout << compare_table(r);
  Json j = manifest(c, "compare");
  j.update(to_json(r, c));
  write_text(out / "compare.json", j.dump(2) + "\n");
  return 0;
}

inline int run_sweep(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto sampling = c.model == "unicycle" || c.model == "planar" ? InitSampling::kUniformDisk : c.init_sampling;
  const auto rows = sweep_noise(c, c.sweep.sigmas, sampling);
  const std::string csv = sweep_csv(rows);
  std::cout << csv;
  write_text(out / "sweep.csv", csv);
  if (c.sweep.points > 0) {
    const double sigma = c.sweep.sigmas.empty() ? 0.1 : c.sweep.sigmas.back();
    write_text(out / "sweep_points.csv",
               points_csv(sweep_points(c, sigma, c.sweep.points, c.sweep.trajectories_per_point)));
  }
  write_text(out / "manifest.json", manifest(c, "sweep").dump(2) + "\n");
  return 0;
}

}  // namespace detail

/// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
inline int cli_main(int argc, char** argv) {
  CLI::App app{"Stochastic safety certificates: simulation and bound estimation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";

  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "Roll out trajectories and write one CSV per path"},
      {"estimate", "Monte Carlo safety probability with the theoretical bound"},
      {"bounds", "Closed-form safety bounds at the configured initial state"},
      {"compare", "Reciprocal vs stochastic barrier, with and without input bounds"},
      {"sweep", "Safety probability across noise levels and certificate families"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Scenario JSON file")->required();
    sub->add_option("--set", overrides, "Override a config key, e.g. --set T=5 (repeatable)");
    sub->add_option("--out", out_dir, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto cfg = load_config(config_path, overrides);
    const auto out = detail::prepare_out(out_dir);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "simulate") return detail::run_simulate(cfg, out);
    if (cmd == "estimate") return detail::run_estimate(cfg, out);
    if (cmd == "bounds") return detail::run_bounds(cfg, out);
    if (cmd == "compare") return detail::run_compare(cfg, out);
    return detail::run_sweep(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ssk
