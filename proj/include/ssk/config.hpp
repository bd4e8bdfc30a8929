#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssk/bounds.hpp"
#include "ssk/certificates.hpp"
#include "ssk/config_schema.hpp"
#include "ssk/ensemble.hpp"
#include "ssk/errors.hpp"
#include "ssk/models.hpp"
#include "ssk/qp.hpp"

namespace ssk {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Minimal JSON Schema validator: type, enum, properties, required,
// additionalProperties=false, items, minItems/maxItems, minimum/maximum,
// exclusiveMinimum. Collects every violation instead of stopping at the first.

namespace detail {

inline bool json_has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  if (t == "boolean") return v.is_boolean();
  if (t == "string") return v.is_string();
  if (t == "null") return v.is_null();
  return false;
}

inline void validate_node(const Json& v, const Json& schema, const std::string& path,
                          std::vector<std::string>& errors) {
  const std::string where = path.empty() ? "<root>" : path;
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) ok = json_has_type(v, t.get<std::string>());
    else for (const auto& e : t) ok = ok || json_has_type(v, e.get<std::string>());
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(where + ": value " + v.dump() + " not in " + schema["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      errors.push_back(where + ": must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
      errors.push_back(where + ": must be <= " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && !(x > schema["exclusiveMinimum"].get<double>())) {
      errors.push_back(where + ": must be > " + schema["exclusiveMinimum"].dump());
    }
  }
  if (v.is_object()) {
    const Json empty = Json::object();
    const Json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (schema.contains("required")) {
      for (const auto& r : schema["required"]) {
        if (!v.contains(r.get<std::string>())) errors.push_back(where + ": missing key '" + r.get<std::string>() + "'");
      }
    }
    std::vector<std::string> unknown;
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path.empty() ? it.key() : path + "." + it.key();
      if (props.contains(it.key())) validate_node(it.value(), props[it.key()], child, errors);
      else if (schema.value("additionalProperties", true) == false) unknown.push_back(child);
    }
    if (!unknown.empty()) {
      std::string msg = "unknown key(s):";
      for (const auto& u : unknown) msg += " " + u;
      errors.push_back(msg);
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(where + ": needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) {
      errors.push_back(where + ": allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate_node(v[i], schema["items"], where + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
}

}  // namespace detail

inline const Json& scenario_schema() {
  static const Json schema = Json::parse(kScenarioSchema);
  return schema;
}

/// Throws ConfigError listing every schema violation.
inline void validate_config_json(const Json& cfg) {
  std::vector<std::string> errors;
  const auto& schema = scenario_schema();
  detail::validate_node(cfg, schema, "", errors);
  if (errors.empty() && cfg.contains("model_params")) {
    const std::string def = cfg["model"].get<std::string>() + "_params";
    detail::validate_node(cfg["model_params"], schema["definitions"][def], "model_params", errors);
  }
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

// ---------------------------------------------------------------------------

struct AlphaConfig {
  std::string kind = "linear";
  double k = 1.0;
  double exponent = 1.0;

  ClassKFunction make() const {
    if (kind == "power") return ClassKFunction::power(k, exponent);
    if (kind == "cubic") return ClassKFunction::cubic(k);
    return ClassKFunction::linear(k);
  }
};

struct CertificateConfig {
  CertificateFamily family = CertificateFamily::kSCBF;
  double gamma = 1.0;
  std::vector<AlphaConfig> alphas;
  int relative_degree = 1;
  bool ho_szcbf_uses_h1 = false;
  bool use_clf = false;
};

struct SweepConfig {
  std::vector<double> sigmas{0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<CertificateFamily> families{CertificateFamily::kHO_SCBF, CertificateFamily::kHO_SZCBF};
  int points = 0;
  int trajectories_per_point = 500;
};

/// Typed scenario configuration; `resolved` is the input with all defaults filled in.
struct ScenarioConfig {
  std::string model;
  models::AccParams acc;
  models::UnicycleParams unicycle;
  models::PlanarParams planar;
  double scalar_sigma = 1.0;
  std::vector<double> x0;
  CertificateConfig certificate;
  double horizon = 1.0;
  double dt = 0.0005;
  int trajectories = 1;
  std::uint64_t seed = 1;
  std::optional<std::vector<Bounds1D>> control_box;
  bool saturate_after = false;
  bool stop_on_exit = true;
  std::vector<double> region_lo, region_hi;
  InitSampling init_sampling = InitSampling::kFixed;
  int sup_resolution = 33;
  SweepConfig sweep;
  Json resolved;

  int state_dim() const {
    if (model == "planar") return 2;
    if (model == "scalar") return 1;
    return 3;
  }
};

namespace detail {

inline Json model_defaults(const std::string& model) {
  if (model == "acc") {
    return Json{{"f0", 0.1}, {"f1", 5.0}, {"f2", 0.25}, {"M", 1650.0}, {"g", 9.81}, {"x_d", 22.0},
                {"tau", 1.8}, {"sigma1", 1.0}, {"sigma2", 1.0}, {"x0", {18.0, 10.0, 150.0}}};
  }
  if (model == "unicycle") {
    return Json{{"v", 2.0}, {"r", 3.0}, {"sigma1", 0.1}, {"sigma2", 0.1}, {"x0", {0.0, 1.5, -1.2}}};
  }
  if (model == "planar") {
    return Json{{"r", 3.0}, {"drift_gain", 0.0}, {"sigma1", 0.1}, {"sigma2", 0.1}, {"x0", {0.0, 1.5}}};
  }
  return Json{{"sigma", 1.0}, {"x0", {0.5}}};
}

inline Json scenario_defaults(const std::string& model, const Json& params) {
  Json d;
  if (model == "acc") {
    d["certificate"] = Json{{"family", "SCBF"}, {"use_clf", true}};
    d["T"] = 20.0;
    d["operating_region"] = Json{{"lo", {0.0, 0.0, 0.0}}, {"hi", {40.0, 40.0, 300.0}}};
  } else if (model == "unicycle" || model == "planar") {
    const double r = params.value("r", 3.0);
    d["certificate"] = model == "unicycle" ? Json{{"family", "HO_SCBF"}, {"relative_degree", 2}}
                                           : Json{{"family", "SCBF"}};
    d["T"] = 5.0;
    if (model == "unicycle") {
      d["operating_region"] = Json{{"lo", {-r, -r, -std::numbers::pi}}, {"hi", {r, r, std::numbers::pi}}};
    } else {
      d["operating_region"] = Json{{"lo", {-r, -r}}, {"hi", {r, r}}};
    }
  } else {
    d["certificate"] = Json{{"family", "SRCBF"}};
    d["T"] = 1.0;
    d["operating_region"] = Json{{"lo", {-2.0}}, {"hi", {1.0}}};
  }
  d["dt"] = 0.0005;
  d["trajectories"] = 200;
  d["seed"] = 1;
  d["control_box"] = nullptr;
  d["saturate_after"] = false;
  d["stop_on_exit"] = true;
  d["init_sampling"] = "fixed";
  d["sup_resolution"] = 33;
  return d;
}

inline Json default_alphas(CertificateFamily f, double gamma) {
  switch (f) {
    case CertificateFamily::kSRCBF: return Json::array({Json{{"kind", "linear"}, {"k", gamma}}});
    case CertificateFamily::kSZCBF: return Json::array({Json{{"kind", "linear"}, {"k", 1.0}}});
    case CertificateFamily::kHO_SZCBF:
      return Json::array({Json{{"kind", "linear"}, {"k", 1.0}}, Json{{"kind", "linear"}, {"k", 1.0}}});
    default: return Json::array();
  }
}

/// Fills missing keys of `target` from `defaults` (objects merged recursively).
inline void merge_defaults(Json& target, const Json& defaults) {
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    if (!target.contains(it.key())) target[it.key()] = it.value();
    else if (target[it.key()].is_object() && it.value().is_object()) merge_defaults(target[it.key()], it.value());
  }
}

inline double bound_or(const Json& v, double fallback) { return v.is_null() ? fallback : v.get<double>(); }

}  // namespace detail

/// Splits "a.b.c=value" and writes value (parsed as JSON, else as a string).
inline void apply_override(Json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &cfg;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) (*node)[parts[i]] = Json::object();
    node = &(*node)[parts[i]];
    if (!node->is_object()) throw ConfigError("override path crosses a non-object at '" + parts[i] + "'");
  }
  (*node)[parts.back()] = value;
}

/// Validates against the schema, fills defaults, and performs semantic checks.
inline ScenarioConfig parse_config(Json raw) {
  if (!raw.is_object()) throw ConfigError("configuration must be a JSON object");
  validate_config_json(raw);
  ScenarioConfig c;
  c.model = raw["model"].get<std::string>();

  Json params = raw.value("model_params", Json::object());
  detail::merge_defaults(params, detail::model_defaults(c.model));
  raw["model_params"] = params;
  detail::merge_defaults(raw, detail::scenario_defaults(c.model, params));

  auto& cert = raw["certificate"];
  const auto family = parse_family(cert.value("family", "SCBF"));
  cert["family"] = std::string(family_name(*family));
  detail::merge_defaults(cert, Json{{"gamma", 1.0}, {"relative_degree", *family == CertificateFamily::kHO_SCBF ||
                                                                            *family == CertificateFamily::kHO_SZCBF
                                                                        ? 2
                                                                        : 1},
                                    {"ho_szcbf_uses_h1", false}, {"use_clf", false}});
  if (!cert.contains("alphas")) cert["alphas"] = detail::default_alphas(*family, cert["gamma"].get<double>());
  for (auto& a : cert["alphas"]) detail::merge_defaults(a, Json{{"exponent", 1.0}});

  Json sweep = raw.value("sweep", Json::object());
  detail::merge_defaults(sweep, Json{{"sigmas", {0.0, 0.05, 0.1, 0.15, 0.2}},
                                     {"families", {"HO_SCBF", "HO_SZCBF"}},
                                     {"points", 0},
                                     {"trajectories_per_point", 500}});
  raw["sweep"] = sweep;

  if (const char* env = std::getenv("SSK_SEED")) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("SSK_SEED must be a nonnegative integer");
    raw["seed"] = s;
  }

  // Typed view.
  if (c.model == "acc") {
    auto& p = c.acc;
    p.f0 = params["f0"]; p.f1 = params["f1"]; p.f2 = params["f2"];
    p.mass = params["M"]; p.gravity = params["g"]; p.desired_speed = params["x_d"];
    p.headway = params["tau"]; p.sigma1 = params["sigma1"]; p.sigma2 = params["sigma2"];
  } else if (c.model == "unicycle") {
    auto& p = c.unicycle;
    p.speed = params["v"]; p.radius = params["r"]; p.sigma1 = params["sigma1"]; p.sigma2 = params["sigma2"];
  } else if (c.model == "planar") {
    auto& p = c.planar;
    p.radius = params["r"]; p.drift_gain = params["drift_gain"];
    p.sigma1 = params["sigma1"]; p.sigma2 = params["sigma2"];
  } else {
    c.scalar_sigma = params["sigma"];
  }
  c.x0 = params["x0"].get<std::vector<double>>();

  c.certificate.family = *family;
  c.certificate.gamma = cert["gamma"];
  c.certificate.relative_degree = cert["relative_degree"];
  c.certificate.ho_szcbf_uses_h1 = cert["ho_szcbf_uses_h1"];
  c.certificate.use_clf = cert["use_clf"];
  for (const auto& a : cert["alphas"]) {
    c.certificate.alphas.push_back({a["kind"].get<std::string>(), a["k"].get<double>(), a["exponent"].get<double>()});
  }

  c.horizon = raw["T"];
  c.dt = raw["dt"];
  c.trajectories = raw["trajectories"];
  c.seed = raw["seed"].get<std::uint64_t>();
  c.saturate_after = raw["saturate_after"];
  c.stop_on_exit = raw["stop_on_exit"];
  c.init_sampling = raw["init_sampling"] == "uniform_disk" ? InitSampling::kUniformDisk : InitSampling::kFixed;
  c.sup_resolution = raw["sup_resolution"];
  c.region_lo = raw["operating_region"]["lo"].get<std::vector<double>>();
  c.region_hi = raw["operating_region"]["hi"].get<std::vector<double>>();

  if (!raw["control_box"].is_null()) {
    const auto& lo = raw["control_box"]["lo"];
    const auto& hi = raw["control_box"]["hi"];
    if (lo.size() != hi.size()) throw ConfigError("control_box: lo and hi must have equal length");
    std::vector<Bounds1D> box;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      box.push_back({detail::bound_or(lo[i], -std::numeric_limits<double>::infinity()),
                     detail::bound_or(hi[i], std::numeric_limits<double>::infinity())});
      if (!(box.back().lo <= box.back().hi)) throw ConfigError("control_box: lo must not exceed hi");
    }
    c.control_box = box;
  }

  c.sweep.sigmas = sweep["sigmas"].get<std::vector<double>>();
  c.sweep.families.clear();
  for (const auto& f : sweep["families"]) c.sweep.families.push_back(*parse_family(f.get<std::string>()));
  c.sweep.points = sweep["points"];
  c.sweep.trajectories_per_point = sweep["trajectories_per_point"];

  // Semantic checks beyond the schema.
  const auto n = static_cast<std::size_t>(c.state_dim());
  if (c.x0.size() != n) throw ConfigError("model_params.x0 must have " + std::to_string(n) + " entries");
  if (c.region_lo.size() != n || c.region_hi.size() != n) {
    throw ConfigError("operating_region bounds must have " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(c.region_lo[i] < c.region_hi[i])) throw ConfigError("operating_region: lo must be below hi");
  }
  if (c.dt > c.horizon) throw ConfigError("dt must not exceed T");
  const std::size_t p = c.model == "planar" ? 2 : 1;
  if (c.control_box && c.control_box->size() != p) {
    throw ConfigError("control_box must have " + std::to_string(p) + " entries");
  }
  if (c.certificate.use_clf && c.model != "acc") throw ConfigError("use_clf is only defined for the acc model");
  const bool ho = c.certificate.family == CertificateFamily::kHO_SCBF ||
                  c.certificate.family == CertificateFamily::kHO_SZCBF;
  if (ho && c.model != "unicycle") throw ConfigError("high-order certificates need the unicycle model");
  if (c.init_sampling == InitSampling::kUniformDisk && c.model != "unicycle" && c.model != "planar") {
    throw ConfigError("uniform_disk sampling needs a planar workspace model");
  }
  c.resolved = raw;
  return c;
}

inline ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json raw;
  try {
    raw = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(raw, o);
  return parse_config(std::move(raw));
}

// ---------------------------------------------------------------------------
// Scenario construction. Every model is dispatched to a concrete
// Scenario<N, P, D> and handed to `fn`.

template <int N, int P, int D>
void fill_common(Scenario<N, P, D>& sc, const ScenarioConfig& c) {
  sc.region = Box<N>{from_std<N>(c.region_lo, "operating_region.lo"), from_std<N>(c.region_hi, "operating_region.hi")};
  sc.x0 = from_std<N>(c.x0, "x0");
  sc.init_sampling = c.init_sampling;
  sc.horizon = c.horizon;
  sc.dt = c.dt;
  sc.trajectories = c.trajectories;
  sc.seed = c.seed;
  sc.control_box = c.control_box;
  sc.saturate_after = c.saturate_after;
  sc.stop_on_exit = c.stop_on_exit;
  sc.sup_resolution.fill(c.sup_resolution);
  sc.spec.family = c.certificate.family;
  sc.spec.gamma = c.certificate.gamma;
  sc.spec.ho_szcbf_uses_h1 = c.certificate.ho_szcbf_uses_h1;
  for (const auto& a : c.certificate.alphas) sc.spec.alphas.push_back(a.make());
}

template <typename Fn>
decltype(auto) with_scenario(const ScenarioConfig& c, Fn&& fn) {
  if (c.model == "acc") {
    Scenario<3, 1, 3> sc{.model = models::make_acc_model(c.acc)};
    sc.spec.h = models::acc_barrier(c.acc);
    if (c.certificate.use_clf) sc.clf = models::acc_lyapunov(c.acc);
    fill_common(sc, c);
    return fn(sc);
  }
  if (c.model == "unicycle") {
    Scenario<3, 1, 3> sc{.model = models::make_unicycle_model(c.unicycle)};
    sc.spec.h = models::unicycle_barrier(c.unicycle);
    fill_common(sc, c);
    sc.disk_radius = c.unicycle.radius;
    if (c.certificate.relative_degree == 2) {
      sc.spec.chain = build_chain(sc.model, sc.spec.h, 2, sc.region,
                                  std::optional<std::vector<SmoothFunction<3>>>{{models::unicycle_b1(c.unicycle)}});
    } else {
      sc.spec.chain = BarrierChain<3>{{sc.spec.h}, 1};
    }
    return fn(sc);
  }
  if (c.model == "planar") {
    Scenario<2, 2, 2> sc{.model = models::make_planar_model(c.planar)};
    sc.spec.h = models::planar_barrier(c.planar);
    fill_common(sc, c);
    sc.disk_radius = c.planar.radius;
    return fn(sc);
  }
  Scenario<1, 1, 1> sc{.model = models::make_scalar_model(c.scalar_sigma)};
  sc.spec.h = models::scalar_barrier();
  fill_common(sc, c);
  return fn(sc);
}

/// Copy of `c` with both noise intensities (or the scalar one) set to sigma.
inline ScenarioConfig with_sigma(ScenarioConfig c, double sigma) {
  c.acc.sigma1 = c.acc.sigma2 = sigma;
  c.unicycle.sigma1 = c.unicycle.sigma2 = sigma;
  c.planar.sigma1 = c.planar.sigma2 = sigma;
  c.scalar_sigma = sigma;
  return c;
}

/// Copy of `c` using another certificate family with that family's default class-K functions.
inline ScenarioConfig with_family(ScenarioConfig c, CertificateFamily f) {
  if (c.certificate.family == f) return c;
  c.certificate.family = f;
  c.certificate.alphas.clear();
  for (const auto& a : detail::default_alphas(f, c.certificate.gamma)) {
    c.certificate.alphas.push_back({a["kind"].get<std::string>(), a["k"].get<double>(), 1.0});
  }
  if (f == CertificateFamily::kHO_SCBF || f == CertificateFamily::kHO_SZCBF) c.certificate.relative_degree = 2;
  return c;
}

}  // namespace ssk
