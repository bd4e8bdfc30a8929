#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssk/bounds.hpp"
#include "ssk/ensemble.hpp"
#include "ssk/errors.hpp"
#include "ssk/generator.hpp"
#include "ssk/sde.hpp"

namespace ssk {

using Json = nlohmann::ordered_json;

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const BoundReport& b) {
  Json j;
  j["family"] = std::string(family_name(b.family));
  j["bound"] = optional_number(b.bound);
  j["horizon"] = b.horizon ? Json(*b.horizon) : Json("inf");
  j["chain_values_at_xi"] = b.chain_values;
  j["sups"] = b.sups;
  j["k"] = optional_number(b.k);
  j["region"] = b.region;
  j["note"] = b.note;
  return j;
}

inline Json to_json(const SafetyReport& r) {
  Json j;
  j["trajectories"] = r.trajectories;
  j["safe_count"] = r.safe_count;
  j["empirical_probability"] = r.empirical_probability;
  j["standard_error"] = r.standard_error;
  j["wilson_interval_95"] = {r.wilson_interval_95.first, r.wilson_interval_95.second};
  j["theoretical_bound"] = to_json(r.theoretical_bound);
  j["mean_sampled_bound"] = optional_number(r.mean_sampled_bound);
  j["exit_count"] = r.exit_count;
  if (r.exit_time_quantiles) {
    const auto& q = *r.exit_time_quantiles;
    j["exit_time_quantiles"] = Json{{"q10", q[0]}, {"q50", q[1]}, {"q90", q[2]}};
  } else {
    j["exit_time_quantiles"] = nullptr;
  }
  j["effort_peak"] = r.effort_peak;
  j["effort_mean"] = r.effort_mean;
  j["infeasible_step_count"] = r.infeasible_step_count;
  j["degenerate_row_count"] = r.degenerate_row_count;
  j["level_stay_fraction"] = r.level_stay_fraction;
  return j;
}

// ---------------------------------------------------------------------------
// CSV helpers (RFC 4180).

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

template <int N, int P>
std::vector<std::string> trajectory_header() {
  std::vector<std::string> cols{"t"};
  for (int i = 0; i < N; ++i) cols.push_back("x_" + std::to_string(i));
  for (int i = 0; i < P; ++i) cols.push_back("u_" + std::to_string(i));
  cols.push_back("h");
  cols.push_back("J");
  return cols;
}

/// One row per recorded state: t, x, the control applied from that state
/// onward (empty on the final row), h(x) and J = |u|^2.
template <int N, int P>
void write_trajectory_csv(std::ostream& out, const Trajectory<N, P>& traj, const SmoothFunction<N>& h) {
  const auto header = trajectory_header<N, P>();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
  out << "\r\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    out << format_double(s.time);
    for (int i = 0; i < N; ++i) out << ',' << format_double(s.values(i));
    if (k < traj.controls.size()) {
      const auto& u = traj.controls[k];
      for (int i = 0; i < P; ++i) out << ',' << format_double(u(i));
      out << ',' << format_double(h.value(s.values)) << ',' << format_double(u.squaredNorm());
    } else {
      for (int i = 0; i < P; ++i) out << ',';
      out << ',' << format_double(h.value(s.values)) << ',';
    }
    out << "\r\n";
  }
}

template <int N, int P>
void emit_trajectory_csv(const Trajectory<N, P>& traj, const SmoothFunction<N>& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trajectory_csv(out, traj, h);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

/// Parsed CSV table: header plus rows of optional numbers (empty field -> nullopt).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  t.header = parse_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::optional<double>> row;
    for (const auto& f : parse_csv_line(line)) {
      if (f.empty()) row.emplace_back(std::nullopt);
      else row.emplace_back(std::strtod(f.c_str(), nullptr));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace ssk
