#pragma once

#include <string>
#include <vector>

#include "ssk/config.hpp"
#include "ssk/ensemble.hpp"
#include "ssk/report.hpp"

namespace ssk {

inline SafetyReport run_ensemble(const ScenarioConfig& c) {
  return with_scenario(c, [](const auto& sc) { return run_ensemble(sc); });
}

struct SweepRow {
  double sigma = 0.0;
  CertificateFamily family = CertificateFamily::kHO_SCBF;
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long trajectories = 0;
};

/// Safety probability per (sigma, family); initial states are resampled per
/// trajectory when `sampling` is uniform_disk (identical across families).
inline std::vector<SweepRow> sweep_noise(const ScenarioConfig& c, const std::vector<double>& sigmas,
                                         InitSampling sampling) {
  std::vector<SweepRow> rows;
  for (double sigma : sigmas) {
    if (!(sigma >= 0.0)) throw ArgumentError("sweep_noise: sigma must be nonnegative");
    for (auto family : c.sweep.families) {
      ScenarioConfig cell = with_family(with_sigma(c, sigma), family);
      cell.init_sampling = sampling;
      const auto r = run_ensemble(cell);
      rows.push_back({sigma, family, r.empirical_probability, r.wilson_interval_95.first,
                      r.wilson_interval_95.second, r.trajectories});
    }
  }
  return rows;
}

struct PointRow {
  int point = 0;
  std::vector<double> x0;
  CertificateFamily family = CertificateFamily::kHO_SCBF;
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Fixed-sigma variant: `points` sampled initial states, `per_point` paths each.
inline std::vector<PointRow> sweep_points(const ScenarioConfig& c, double sigma, int points, int per_point) {
  std::vector<PointRow> rows;
  ScenarioConfig base = with_sigma(c, sigma);
  base.init_sampling = InitSampling::kUniformDisk;
  std::vector<std::vector<double>> starts;
  with_scenario(base, [&](const auto& sc) {
    for (int i = 0; i < points; ++i) {
      // Offset keeps these draws apart from the per-trajectory ones.
      starts.push_back(to_std(initial_state(sc, 0x40000000u + static_cast<std::uint32_t>(i))));
    }
    return 0;
  });
  for (int i = 0; i < points; ++i) {
    for (auto family : c.sweep.families) {
      ScenarioConfig cell = with_family(base, family);
      cell.init_sampling = InitSampling::kFixed;
      cell.x0 = starts[static_cast<std::size_t>(i)];
      cell.trajectories = per_point;
      const auto r = run_ensemble(cell);
      rows.push_back({i, cell.x0, family, r.empirical_probability, r.wilson_interval_95.first,
                      r.wilson_interval_95.second});
    }
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "sigma,family,p,lo,hi\r\n";
  for (const auto& r : rows) {
    out += format_double(r.sigma) + "," + std::string(family_name(r.family)) + "," + format_double(r.p) + "," +
           format_double(r.lo) + "," + format_double(r.hi) + "\r\n";
  }
  return out;
}

inline std::string points_csv(const std::vector<PointRow>& rows) {
  std::string out = "point";
  if (!rows.empty()) {
    for (std::size_t i = 0; i < rows.front().x0.size(); ++i) out += ",x0_" + std::to_string(i);
  }
  out += ",family,p,lo,hi\r\n";
  for (const auto& r : rows) {
    out += std::to_string(r.point);
    for (double v : r.x0) out += "," + format_double(v);
    out += "," + std::string(family_name(r.family)) + "," + format_double(r.p) + "," + format_double(r.lo) +
           "," + format_double(r.hi) + "\r\n";
  }
  return out;
}

/// Saturation comparison: {SRCBF, SCBF} x {unbounded, bounded}, matched seeds.
struct CompareResult {
  SafetyReport srcbf_unbounded, srcbf_bounded, scbf_unbounded, scbf_bounded;
};

inline std::vector<Bounds1D> compare_box(const ScenarioConfig& c) {
  if (c.control_box) return *c.control_box;
  if (c.model == "acc") {
    return {{-0.5 * c.acc.mass * c.acc.gravity, std::numeric_limits<double>::infinity()}};
  }
  throw ConfigError("compare needs control_box for models other than acc");
}

inline CompareResult compare_saturation(const ScenarioConfig& c) {
  const auto box = compare_box(c);
  auto cell = [&](CertificateFamily f, bool bounded) {
    ScenarioConfig cc = with_family(c, f);
    cc.control_box = bounded ? std::optional(box) : std::nullopt;
    return run_ensemble(cc);
  };
  return {cell(CertificateFamily::kSRCBF, false), cell(CertificateFamily::kSRCBF, true),
          cell(CertificateFamily::kSCBF, false), cell(CertificateFamily::kSCBF, true)};
}

inline Json to_json(const CompareResult& r, const ScenarioConfig& c) {
  Json j;
  j["config"] = c.resolved;
  const auto box = compare_box(c);
  j["bounded_box"] = Json::array();
  for (const auto& b : box) {
    j["bounded_box"].push_back({std::isfinite(b.lo) ? Json(b.lo) : Json(nullptr),
                                std::isfinite(b.hi) ? Json(b.hi) : Json(nullptr)});
  }
  j["SRCBF"] = Json{{"unbounded", to_json(r.srcbf_unbounded)}, {"bounded", to_json(r.srcbf_bounded)}};
  j["SCBF"] = Json{{"unbounded", to_json(r.scbf_unbounded)}, {"bounded", to_json(r.scbf_bounded)}};
  return j;
}

inline std::string compare_table(const CompareResult& r) {
  char buf[256];
  std::string out = "                    SRCBF     SCBF\n";
  std::snprintf(buf, sizeof buf, "Unbounded control  %6.1f%%  %6.1f%%\n", 100.0 * r.srcbf_unbounded.empirical_probability,
                100.0 * r.scbf_unbounded.empirical_probability);
  out += buf;
  std::snprintf(buf, sizeof buf, "Bounded control    %6.1f%%  %6.1f%%\n", 100.0 * r.srcbf_bounded.empirical_probability,
                100.0 * r.scbf_bounded.empirical_probability);
  out += buf;
  return out;
}

}  // namespace ssk

namespace ssk {

/// Every closed-form bound that applies at the configured initial state.
struct BoundsTable {
  std::vector<double> x0;
  std::vector<double> chain_values;
  std::vector<SupEstimate> sups;
  std::vector<std::pair<std::string, std::optional<double>>> rows;
  std::vector<std::string> notes;
};

inline BoundsTable bounds_table(const ScenarioConfig& c) {
  return with_scenario(c, [&](const auto& sc) {
    BoundsTable t;
    t.x0 = c.x0;
    t.sups = level_sups(sc);
    for (const auto& level : certificate_levels(sc.spec)) t.chain_values.push_back(level.value(sc.x0));
    const double h = t.chain_values.front();
    const double c0 = t.sups.front().value;
    auto add = [&](std::string name, auto&& f) {
      try {
        t.rows.emplace_back(std::move(name), f());
      } catch (const std::exception& e) {
        t.rows.emplace_back(name, std::nullopt);
        t.notes.push_back(name + ": " + e.what());
      }
    };
    add("scbf_bound", [&] { return scbf_bound(h, c0); });
    add("szcbf_bound", [&] { return szcbf_bound(h, c0, c.horizon); });
    if (t.chain_values.size() > 1) {
      std::vector<double> s;
      for (const auto& e : t.sups) s.push_back(e.value);
      add("ho_scbf_bound", [&] { return ho_scbf_bound(t.chain_values, s); });
    }
    // Safety probability from the nonnegative supermartingale c - h.
    add("kushner_bound", [&] { return 1.0 - kushner_supermartingale_bound(c0 - h, c0); });
    return t;
  });
}

inline Json to_json(const BoundsTable& t) {
  Json j;
  j["x0"] = t.x0;
  j["chain_values"] = t.chain_values;
  j["sups"] = Json::array();
  for (const auto& s : t.sups) {
    j["sups"].push_back(Json{{"value", s.value}, {"region", s.region}, {"samples", s.sample_count},
                             {"justification", s.justification}});
  }
  Json rows;
  for (const auto& [name, v] : t.rows) rows[name] = optional_number(v);
  j["bounds"] = rows;
  j["notes"] = t.notes;
  return j;
}

inline std::string format_bounds_table(const BoundsTable& t) {
  std::string out;
  char buf[160];
  for (std::size_t j = 0; j < t.chain_values.size(); ++j) {
    std::snprintf(buf, sizeof buf, "b_%zu(x0) = %-12.6g sup = %.6g\n", j, t.chain_values[j], t.sups[j].value);
    out += buf;
  }
  for (const auto& [name, v] : t.rows) {
    if (v) std::snprintf(buf, sizeof buf, "%-15s %.6g\n", name.c_str(), *v);
    else std::snprintf(buf, sizeof buf, "%-15s n/a\n", name.c_str());
    out += buf;
  }
  for (const auto& n : t.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace ssk
