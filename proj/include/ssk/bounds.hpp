#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssk/certificates.hpp"
#include "ssk/errors.hpp"
#include "ssk/generator.hpp"
#include "ssk/linalg.hpp"

namespace ssk {

enum class SupMethod { kAnalytic, kGrid, kSampled };

/// Estimate of sup b over a region. Grid/sampled values are maxima over
/// evaluated points, so they never exceed the true supremum.
struct SupEstimate {
  double value = 0.0;
  SupMethod method = SupMethod::kGrid;
  std::string region;
  long sample_count = 0;
  std::string justification;

  static SupEstimate analytic(double value, std::string region, std::string why) {
    return {value, SupMethod::kAnalytic, std::move(region), 0, std::move(why)};
  }
};

/// Tensor-grid maximum over `region` (optionally restricted to points where
/// `admissible` holds), followed by coordinate ascent from the best grid
/// point: 50 iterations, step halving on failure.
template <int N>
SupEstimate estimate_sup(const SmoothFunction<N>& fn, const Box<N>& region,
                         const std::array<int, N>& resolution,
                         const std::function<bool(const Vec<N>&)>& admissible = {}) {
  if (!region.valid()) throw ArgumentError("estimate_sup: region must be a finite box with lo <= hi");
  for (int r : resolution) {
    if (r < 2) throw ArgumentError("estimate_sup: resolution must be >= 2 per dimension");
  }
  auto ok = [&](const Vec<N>& x) { return region.contains(x) && (!admissible || admissible(x)); };

  long total = 1;
  for (int r : resolution) total *= r;
  Vec<N> step;
  for (int d = 0; d < N; ++d) {
    step(d) = (region.hi(d) - region.lo(d)) / (resolution[static_cast<std::size_t>(d)] - 1);
  }

  double best = -std::numeric_limits<double>::infinity();
  Vec<N> best_x = region.lo;
  long evaluated = 0;
  std::array<int, N> idx{};
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    Vec<N> x;
    for (int d = 0; d < N; ++d) {
      idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % resolution[static_cast<std::size_t>(d)]);
      rem /= resolution[static_cast<std::size_t>(d)];
      x(d) = region.lo(d) + idx[static_cast<std::size_t>(d)] * step(d);
    }
    if (admissible && !admissible(x)) continue;
    const double v = fn.value(x);
    ++evaluated;
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  if (evaluated == 0) throw ArgumentError("estimate_sup: no admissible grid point in region");

  Vec<N> delta = 0.5 * step;
  for (int iter = 0; iter < 50; ++iter) {
    bool improved = false;
    for (int d = 0; d < N; ++d) {
      for (double sgn : {1.0, -1.0}) {
        Vec<N> trial = best_x;
        trial(d) += sgn * delta(d);
        if (!ok(trial)) continue;
        const double v = fn.value(trial);
        ++evaluated;
        if (v > best) {
          best = v;
          best_x = trial;
          improved = true;
        }
      }
    }
    if (!improved) delta *= 0.5;
  }
  return {best, SupMethod::kGrid, region.describe(), evaluated, {}};
}

namespace detail {

inline void require_level(double b, double c, const char* who) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError(std::string(who) + ": c must be positive and finite");
  if (!(b >= 0.0) || !(b <= c)) throw ArgumentError(std::string(who) + ": need 0 <= h(xi) <= c");
}

}  // namespace detail

/// (h(xi)/c) exp(-c T), clamped to [0, 1].
inline double szcbf_bound(double h_xi, double c, double horizon) {
  detail::require_level(h_xi, c, "szcbf_bound");
  if (!(horizon >= 0.0)) throw ArgumentError("szcbf_bound: T must be nonnegative");
  return std::clamp(h_xi / c * std::exp(-c * horizon), 0.0, 1.0);
}

/// h(xi)/c, valid for all time under the SCBF strategy.
inline double scbf_bound(double h_xi, double c) {
  detail::require_level(h_xi, c, "scbf_bound");
  return h_xi / c;
}

/// prod_j b_j(xi)/c_j. A level with b_j(xi) < 0 violates the hypothesis; a
/// level exactly on its boundary makes the product 0.
inline double ho_scbf_bound(const std::vector<double>& chain_values, const std::vector<double>& sups) {
  if (chain_values.empty() || chain_values.size() != sups.size()) {
    throw ArgumentError("ho_scbf_bound: need one supremum per chain level");
  }
  double prod = 1.0;
  for (std::size_t j = 0; j < chain_values.size(); ++j) {
    const double b = chain_values[j], c = sups[j];
    if (!(b >= 0.0)) {
      throw HypothesisViolationError("ho_scbf_bound: b_" + std::to_string(j) + "(xi)=" +
                                         std::to_string(b) + " < 0, initial state outside C_" +
                                         std::to_string(j) + " interior",
                                     static_cast<int>(j));
    }
    if (!(c > 0.0) || !(b <= c)) {
      throw ArgumentError("ho_scbf_bound: need 0 < b_j(xi) <= c_j at level " + std::to_string(j));
    }
    prod *= b / c;
  }
  return prod;
}

/// min(1, v0/lambda) for a nonnegative supermartingale started at v0.
inline double kushner_supermartingale_bound(double v0, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("kushner_supermartingale_bound: lambda must be positive");
  if (!(v0 >= 0.0)) throw ArgumentError("kushner_supermartingale_bound: v0 must be nonnegative");
  return std::min(1.0, v0 / lambda);
}

struct BoundReport {
  CertificateFamily family = CertificateFamily::kSCBF;
  std::optional<double> bound;  // empty when the hypotheses fail
  std::optional<double> horizon;  // empty means infinite
  std::vector<double> chain_values;
  std::vector<double> sups;
  std::optional<double> k;
  std::string region;
  std::string note;
};

}  // namespace ssk
