#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ssk/bounds.hpp"
#include "ssk/certificates.hpp"
#include "ssk/generator.hpp"
#include "ssk/noise.hpp"
#include "ssk/qp.hpp"
#include "ssk/sde.hpp"
#include "ssk/stats.hpp"

namespace ssk {

enum class InitSampling { kFixed, kUniformDisk };

/// Everything needed to roll out one closed-loop experiment.
template <int N, int P, int D>
struct Scenario {
  SdeModel<N, P, D> model;
  CertificateSpec<N> spec{};
  std::optional<SmoothFunction<N>> clf{};
  Box<N> region{};
  Vec<N> x0 = Vec<N>::Zero();
  InitSampling init_sampling = InitSampling::kFixed;
  double disk_radius = 0.0;  // for kUniformDisk
  double horizon = 1.0;
  double dt = 0.0005;
  int trajectories = 1;
  std::uint64_t seed = 1;
  std::optional<std::vector<Bounds1D>> control_box{};
  bool saturate_after = false;
  bool stop_on_exit = true;
  std::array<int, N> sup_resolution{};
};

/// Initial state for trajectory `index`: the fixed x0, or an area-uniform draw
/// from the disk of `disk_radius` in the first two coordinates with the third
/// (heading) uniform on [0, 2 pi).
template <int N, int P, int D>
Vec<N> initial_state(const Scenario<N, P, D>& sc, std::uint32_t index) {
  if (sc.init_sampling == InitSampling::kFixed) return sc.x0;
  Vec<N> x = sc.x0;
  if constexpr (N >= 2) {
    NoiseStream s{sc.seed, index, 0};
    double u[3] = {0.0, 0.0, 0.0};
    detail::uniforms(s, 3, detail::kSamplingDomain, [&](int i, double v) { u[i] = v; });
    // Radius strictly inside: (0, 1] draws scaled by (1 - 1e-12).
    const double rho = sc.disk_radius * std::sqrt(u[0]) * (1.0 - 1e-12);
    const double phi = 2.0 * std::numbers::pi * u[1];
    x(0) = rho * std::cos(phi);
    x(1) = rho * std::sin(phi);
    if constexpr (N >= 3) x(2) = std::fmod(2.0 * std::numbers::pi * u[2], 2.0 * std::numbers::pi);
  }
  return x;
}

/// Per-step safety filter: certificate row (+ CLF row with slack) -> QP ->
/// optional clamp. Counts infeasible steps and dropped degenerate rows.
template <int N, int P, int D>
class CertificateController {
 public:
  explicit CertificateController(const Scenario<N, P, D>& sc) : sc_(sc) {
    problem_ = QpProblem::make(P, sc.clf.has_value());
    problem_.rows.reserve(4);
  }

  Vec<P> operator()(const State<N>& state) {
    const Vec<N>& x = state.values;
    problem_.rows.clear();
    if (sc_.clf) problem_.rows.push_back(clf_row(sc_.model, *sc_.clf, x));
    const std::size_t first_cert = problem_.rows.size();
    bool trivially_infeasible = false;
    last_dropped_ = false;
    try {
      append_certificate_rows(x);
    } catch (const DegenerateConstraintError&) {
      ++degenerate_rows_;
      last_dropped_ = true;
    } catch (const InfeasibleConstraintError&) {
      trivially_infeasible = true;
    }

    const bool box_in_qp = sc_.control_box && !sc_.saturate_after;
    problem_.box = box_in_qp ? sc_.control_box : std::nullopt;
    QpSolution sol;
    if (!trivially_infeasible) sol = solve(problem_);
    if (trivially_infeasible || sol.status == QpStatus::kInfeasible) {
      ++infeasible_steps_;
      // Least-norm point of the certificate rows alone, then clamp.
      QpProblem fallback = QpProblem::make(P, false);
      for (std::size_t i = first_cert; i < problem_.rows.size(); ++i) {
        fallback.rows.push_back(problem_.rows[i]);
      }
      SmallVec u = SmallVec::Zero(P);
      if (!trivially_infeasible) {
        const auto fb = solve(fallback);
        if (fb.status == QpStatus::kOptimal) u = fb.u;
      }
      if (sc_.control_box) u = saturate(u, *sc_.control_box);
      return Vec<P>(u);
    }
    SmallVec u = sol.u;
    if (sc_.control_box && sc_.saturate_after) u = saturate(u, *sc_.control_box);
    return Vec<P>(u);
  }

  long infeasible_steps() const { return infeasible_steps_; }
  long degenerate_rows() const { return degenerate_rows_; }
  bool last_row_dropped() const { return last_dropped_; }

 private:
  void push(std::optional<AffineConstraint> row) {
    if (row) problem_.rows.push_back(std::move(*row));
  }

  void append_certificate_rows(const Vec<N>& x) {
    const auto& spec = sc_.spec;
    switch (spec.family) {
      case CertificateFamily::kSRCBF: push(srcbf_row(sc_.model, spec, x)); break;
      case CertificateFamily::kSZCBF: push(szcbf_row(sc_.model, spec, x)); break;
      case CertificateFamily::kSCBF: push(scbf_row(sc_.model, spec, x)); break;
      case CertificateFamily::kHO_SCBF: push(ho_scbf_row(sc_.model, *spec.chain, x)); break;
      case CertificateFamily::kHO_SZCBF:
        push(ho_szcbf_row(sc_.model, *spec.chain, spec.alphas[0], spec.alphas[1], x,
                          spec.ho_szcbf_uses_h1));
        break;
    }
  }

  const Scenario<N, P, D>& sc_;
  QpProblem problem_;
  long infeasible_steps_ = 0;
  long degenerate_rows_ = 0;
  bool last_dropped_ = false;
};

struct PathResult {
  bool safe = true;
  std::optional<double> exit_time;
  double effort_peak = 0.0;
  double effort_mean = 0.0;
  long infeasible_steps = 0;
  long degenerate_rows = 0;
  std::vector<bool> level_stayed;  // b_j > 0 along the recorded path, per chain level
  std::optional<double> bound;     // theoretical bound at this path's initial state
};

/// Chain levels used for per-level statistics and the product bound.
template <int N>
std::vector<SmoothFunction<N>> certificate_levels(const CertificateSpec<N>& spec) {
  if (spec.chain) return spec.chain->levels;
  return {spec.h};
}

/// Supremum estimates c_j of every chain level over the operating region
/// intersected with the safe set.
template <int N, int P, int D>
std::vector<SupEstimate> level_sups(const Scenario<N, P, D>& sc) {
  std::vector<SupEstimate> out;
  const auto h = sc.spec.h;
  for (const auto& level : certificate_levels(sc.spec)) {
    out.push_back(estimate_sup<N>(level, sc.region, sc.sup_resolution,
                                  [h](const Vec<N>& x) { return h.value(x) >= 0.0; }));
  }
  return out;
}

/// Worst-case bound for the scenario's family at initial state xi.
template <int N, int P, int D>
BoundReport theoretical_bound(const Scenario<N, P, D>& sc, const Vec<N>& xi,
                              const std::vector<SupEstimate>& sups) {
  BoundReport rep;
  rep.family = sc.spec.family;
  rep.region = sc.region.describe();
  for (const auto& s : sups) rep.sups.push_back(s.value);
  for (const auto& level : certificate_levels(sc.spec)) rep.chain_values.push_back(level.value(xi));
  const double h_xi = rep.chain_values.front();
  const double c = rep.sups.front();
  try {
    switch (sc.spec.family) {
      case CertificateFamily::kSRCBF:
        rep.bound = 1.0;
        rep.note = "almost-sure invariance of the interior under the reciprocal strategy (continuous time)";
        break;
      case CertificateFamily::kSZCBF:
        rep.horizon = sc.horizon;
        rep.k = sc.spec.alphas.front().gain();
        rep.bound = szcbf_bound(h_xi, c, sc.horizon);
        break;
      case CertificateFamily::kSCBF:
        rep.bound = scbf_bound(h_xi, c);
        break;
      case CertificateFamily::kHO_SCBF:
        rep.bound = ho_scbf_bound(rep.chain_values, rep.sups);
        break;
      case CertificateFamily::kHO_SZCBF:
        rep.note = "no closed-form bound for the second-order zeroing construction";
        break;
    }
  } catch (const HypothesisViolationError& e) {
    rep.note = e.what();
  } catch (const ArgumentError& e) {
    rep.note = e.what();
  }
  return rep;
}

/// One closed-loop path with streaming statistics (no state history kept).
template <int N, int P, int D>
PathResult run_path(const Scenario<N, P, D>& sc, std::uint32_t index) {
  const auto levels = certificate_levels(sc.spec);
  CertificateController<N, P, D> controller(sc);
  PathResult res;
  State<N> x0;
  x0.values = initial_state(sc, index);
  res.level_stayed.assign(levels.size(), true);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!(levels[j].value(x0.values) > 0.0)) res.level_stayed[j] = false;
  }
  const auto& h = sc.spec.h;
  double effort_sum = 0.0;
  std::size_t steps = 0;
  res.exit_time = integrate(
      sc.model, controller, x0, sc.horizon, sc.dt, NoiseStream{sc.seed, index, 0}, sc.stop_on_exit,
      [&h](const Vec<N>& x) { return h.value(x) > 0.0; },
      [&](std::size_t, const State<N>& x, const Vec<P>& u) {
        const double J = u.squaredNorm();
        res.effort_peak = std::max(res.effort_peak, J);
        effort_sum += J;
        ++steps;
        for (std::size_t j = 1; j < levels.size(); ++j) {
          if (res.level_stayed[j] && !(levels[j].value(x.values) > 0.0)) res.level_stayed[j] = false;
        }
      });
  res.safe = !res.exit_time.has_value();
  if (res.exit_time) res.level_stayed[0] = false;
  res.effort_mean = steps ? effort_sum / static_cast<double>(steps) : 0.0;
  res.infeasible_steps = controller.infeasible_steps();
  res.degenerate_rows = controller.degenerate_rows();
  return res;
}

/// Worker count: hardware concurrency capped by SSK_THREADS.
inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SSK_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(i) for i in [0, count) across a worker pool. Results must be
/// written to index-addressed storage so the reduction order is fixed.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct SafetyReport {
  long trajectories = 0;
  long safe_count = 0;
  double empirical_probability = 0.0;
  double standard_error = 0.0;
  std::pair<double, double> wilson_interval_95{0.0, 0.0};
  BoundReport theoretical_bound;
  /// Mean of the per-path bounds when initial states are sampled (0 where the hypotheses fail).
  std::optional<double> mean_sampled_bound;
  std::optional<std::array<double, 3>> exit_time_quantiles;  // 10%, 50%, 90%
  long exit_count = 0;
  double effort_peak = 0.0;
  double effort_mean = 0.0;
  long infeasible_step_count = 0;
  long degenerate_row_count = 0;
  std::vector<double> level_stay_fraction;
};

template <int N, int P, int D>
SafetyReport run_ensemble(const Scenario<N, P, D>& sc) {
  if (sc.trajectories < 1) throw ArgumentError("run_ensemble: trajectories must be positive");
  sc.spec.validate();
  const auto sups = level_sups(sc);
  const auto n = static_cast<std::size_t>(sc.trajectories);
  std::vector<PathResult> paths(n);
  parallel_for(n, [&](std::size_t i) {
    paths[i] = run_path(sc, static_cast<std::uint32_t>(i));
    if (sc.init_sampling != InitSampling::kFixed) {
      const auto rep = theoretical_bound(sc, initial_state(sc, static_cast<std::uint32_t>(i)), sups);
      paths[i].bound = rep.bound.value_or(0.0);
    }
  });

  SafetyReport r;
  r.trajectories = sc.trajectories;
  r.theoretical_bound = theoretical_bound(sc, initial_state(sc, 0), sups);
  std::vector<double> exits;
  double effort_mean_sum = 0.0, bound_sum = 0.0;
  r.level_stay_fraction.assign(paths.front().level_stayed.size(), 0.0);
  for (const auto& p : paths) {
    if (p.safe) ++r.safe_count;
    if (p.exit_time) exits.push_back(*p.exit_time);
    r.effort_peak = std::max(r.effort_peak, p.effort_peak);
    effort_mean_sum += p.effort_mean;
    r.infeasible_step_count += p.infeasible_steps;
    r.degenerate_row_count += p.degenerate_rows;
    for (std::size_t j = 0; j < p.level_stayed.size(); ++j) {
      if (p.level_stayed[j]) r.level_stay_fraction[j] += 1.0;
    }
    if (p.bound) bound_sum += *p.bound;
  }
  for (auto& f : r.level_stay_fraction) f /= static_cast<double>(n);
  r.empirical_probability = static_cast<double>(r.safe_count) / static_cast<double>(n);
  r.standard_error = proportion_se(r.empirical_probability, static_cast<long>(n));
  r.wilson_interval_95 = wilson_interval(r.safe_count, static_cast<long>(n));
  r.effort_mean = effort_mean_sum / static_cast<double>(n);
  r.exit_count = static_cast<long>(exits.size());
  if (!exits.empty()) {
    r.exit_time_quantiles = std::array<double, 3>{quantile(exits, 0.1), quantile(exits, 0.5),
                                                  quantile(exits, 0.9)};
  }
  if (sc.init_sampling != InitSampling::kFixed) r.mean_sampled_bound = bound_sum / static_cast<double>(n);
  return r;
}

}  // namespace ssk
