#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssk/errors.hpp"
#include "ssk/linalg.hpp"
#include "ssk/noise.hpp"
#include "ssk/sde.hpp"

namespace ssk {

/// A C^2 scalar field with its analytic (or synthesized) derivatives.
template <int N>
struct SmoothFunction {
  std::function<double(const Vec<N>&)> value;
  std::function<Vec<N>(const Vec<N>&)> gradient;
  std::function<Mat<N, N>(const Vec<N>&)> hessian;

  double operator()(const Vec<N>& x) const { return value(x); }
};

template <int N>
SmoothFunction<N> constant_function(double c) {
  return {[c](const Vec<N>&) { return c; }, [](const Vec<N>&) { return Vec<N>::Zero().eval(); },
          [](const Vec<N>&) { return Mat<N, N>::Zero().eval(); }};
}

/// a * f + b * g, derivatives combined termwise.
template <int N>
SmoothFunction<N> linear_combination(double a, SmoothFunction<N> f, double b, SmoothFunction<N> g) {
  return {[=](const Vec<N>& x) { return a * f.value(x) + b * g.value(x); },
          [=](const Vec<N>& x) { return (a * f.gradient(x) + b * g.gradient(x)).eval(); },
          [=](const Vec<N>& x) { return (a * f.hessian(x) + b * g.hessian(x)).eval(); }};
}

/// The generator split into its control-free and control-linear parts.
template <int P>
struct GeneratorDecomposition {
  double drift_part = 0.0;
  Vec<P> control_part = Vec<P>::Zero();

  double at(const Vec<P>& u) const { return drift_part + control_part.dot(u); }
};

namespace detail {

/// 1/2 * sum_ij (sigma sigma^T)_ij H_ij with H symmetrized first.
template <int N, int D>
double half_trace_term(const Mat<N, D>& sigma, const Mat<N, N>& hessian) {
  const Mat<N, N> sym = 0.5 * (hessian + hessian.transpose());
  return 0.5 * ((sigma * sigma.transpose()).cwiseProduct(sym)).sum();
}

}  // namespace detail

template <int N, int P, int D>
GeneratorDecomposition<P> decompose(const SdeModel<N, P, D>& model, const SmoothFunction<N>& fn,
                                    const Vec<N>& x) {
  const Vec<N> grad = fn.gradient(x);
  GeneratorDecomposition<P> out;
  out.drift_part =
      grad.dot(model.drift(x)) + detail::half_trace_term<N, D>(model.diffusion(x), fn.hessian(x));
  out.control_part = (grad.transpose() * model.control_matrix(x)).transpose();
  return out;
}

/// Infinitesimal generator of the controlled diffusion applied to `fn` at (x, u).
template <int N, int P, int D>
double apply_generator(const SdeModel<N, P, D>& model, const SmoothFunction<N>& fn,
                       const Vec<N>& x, const Vec<P>& u) {
  const Vec<N> grad = fn.gradient(x);
  return grad.dot(model.drift(x) + model.control_matrix(x) * u) +
         detail::half_trace_term<N, D>(model.diffusion(x), fn.hessian(x));
}

template <int N, int P, int D>
double apply_generator(const SdeModel<N, P, D>& model, const SmoothFunction<N>& fn,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  if (x.size() != N || u.size() != P) throw ArgumentError("apply_generator: dimension mismatch");
  return apply_generator(model, fn, Vec<N>(x), Vec<P>(u));
}

/// Central-difference step used when synthesizing derivatives.
inline double fd_step(double xi, double scale = 1e-5) { return scale * (1.0 + std::abs(xi)); }

/// Builds gradient/Hessian for `value` by central differences (gradient step
/// 1e-5(1+|x_i|), Hessian step 1e-4(1+|x_i|)); Hessian is symmetrized.
template <int N>
SmoothFunction<N> finite_difference_function(std::function<double(const Vec<N>&)> value) {
  SmoothFunction<N> fn;
  fn.value = value;
  fn.gradient = [value](const Vec<N>& x) {
    Vec<N> g;
    for (int i = 0; i < N; ++i) {
      const double h = fd_step(x(i));
      Vec<N> xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      g(i) = (value(xp) - value(xm)) / (2.0 * h);
    }
    return g;
  };
  fn.hessian = [value](const Vec<N>& x) {
    Mat<N, N> H;
    const double f0 = value(x);
    for (int i = 0; i < N; ++i) {
      const double hi = fd_step(x(i), 1e-4);
      for (int j = i; j < N; ++j) {
        const double hj = fd_step(x(j), 1e-4);
        if (i == j) {
          Vec<N> xp = x, xm = x;
          xp(i) += hi;
          xm(i) -= hi;
          H(i, i) = (value(xp) - 2.0 * f0 + value(xm)) / (hi * hi);
        } else {
          Vec<N> pp = x, pm = x, mp = x, mm = x;
          pp(i) += hi, pp(j) += hj;
          pm(i) += hi, pm(j) -= hj;
          mp(i) -= hi, mp(j) += hj;
          mm(i) -= hi, mm(j) -= hj;
          H(i, j) = H(j, i) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * hi * hj);
        }
      }
    }
    return H;
  };
  return fn;
}

/// Probe-based check of the SmoothFunction invariants: symmetric Hessian and
/// gradient agreeing with central differences of the value.
template <int N>
bool derivatives_consistent(const SmoothFunction<N>& fn, const std::vector<Vec<N>>& probes,
                            double grad_rel_tol = 1e-5, double sym_rel_tol = 1e-12) {
  for (const auto& x : probes) {
    const Mat<N, N> H = fn.hessian(x);
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > sym_rel_tol * (1.0 + H.cwiseAbs().maxCoeff())) {
      return false;
    }
    const Vec<N> g = fn.gradient(x);
    for (int i = 0; i < N; ++i) {
      const double h = fd_step(x(i));
      Vec<N> xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fd = (fn.value(xp) - fn.value(xm)) / (2.0 * h);
      if (std::abs(fd - g(i)) > grad_rel_tol * (1.0 + g.cwiseAbs().maxCoeff())) return false;
    }
  }
  return true;
}

/// b_0 = h and b_j = (drift-only generator) b_{j-1}; valid while the control
/// part of every level below the top vanishes.
template <int N>
struct BarrierChain {
  std::vector<SmoothFunction<N>> levels;
  int relative_degree = 1;

  const SmoothFunction<N>& top() const { return levels.back(); }
};

/// Control parts at or below this magnitude count as vanishing.
inline constexpr double kVanishingControlTol = 1e-9;
inline constexpr int kProbeCount = 256;

template <int N, int P, int D>
SmoothFunction<N> drift_generator_function(const SdeModel<N, P, D>& model,
                                           const SmoothFunction<N>& fn) {
  return finite_difference_function<N>(
      [model, fn](const Vec<N>& x) { return decompose(model, fn, x).drift_part; });
}

/// Constructs and verifies the barrier chain on Halton probes of `region`
/// restricted to the interior of the safe set {h > 0}.
///
/// `supplied` may carry analytic b_1..b_{r-1} (required when r > 2). Without it,
/// b_1 is synthesized by nested central differences.
template <int N, int P, int D>
BarrierChain<N> build_chain(const SdeModel<N, P, D>& model, const SmoothFunction<N>& h, int r,
                            const Box<N>& region,
                            const std::optional<std::vector<SmoothFunction<N>>>& supplied = std::nullopt) {
  if (r < 1) throw ArgumentError("build_chain: relative degree must be >= 1");
  if (!region.valid()) throw ArgumentError("build_chain: invalid operating region");
  if (supplied && static_cast<int>(supplied->size()) != r - 1) {
    throw ArgumentError("build_chain: supplied levels must cover b_1..b_{r-1}");
  }
  if (!supplied && r > 2) {
    throw ArgumentError("build_chain: analytic levels are required for relative degree > 2");
  }

  BarrierChain<N> chain;
  chain.relative_degree = r;
  chain.levels.push_back(h);
  for (int j = 1; j < r; ++j) {
    chain.levels.push_back(supplied ? (*supplied)[static_cast<std::size_t>(j - 1)]
                                    : drift_generator_function(model, chain.levels.back()));
  }

  std::vector<Vec<N>> probes;
  for (const auto& p : halton_points(region, kProbeCount)) {
    if (h.value(p) > 0.0) probes.push_back(p);
  }
  if (probes.empty()) {
    throw CertificateConstructionError("build_chain: no probe state lies inside the safe set", 0, {});
  }

  for (const auto& x : probes) {
    for (int j = 0; j < r; ++j) {
      const auto& level = chain.levels[static_cast<std::size_t>(j)];
      const auto dec = decompose(model, level, x);
      const double authority = dec.control_part.norm();
      if (j < r - 1 && authority > kVanishingControlTol) {
        throw CertificateConstructionError(
            "build_chain: control enters level " + std::to_string(j) +
                " (relative degree lower than requested)",
            j, to_std(x));
      }
      if (j == r - 1 && authority <= kVanishingControlTol) {
        throw CertificateConstructionError(
            "build_chain: control does not enter top level " + std::to_string(j) +
                " (relative degree higher than requested)",
            j, to_std(x));
      }
      if (supplied && j >= 1) {
        // Supplied level must equal the drift-only generator of the level below.
        const double expected =
            decompose(model, chain.levels[static_cast<std::size_t>(j - 1)], x).drift_part;
        const double got = level.value(x);
        if (std::abs(expected - got) > 1e-9 * (1.0 + std::abs(expected))) {
          throw CertificateConstructionError(
              "build_chain: supplied level " + std::to_string(j) +
                  " does not match the generator of level " + std::to_string(j - 1),
              j, to_std(x));
        }
      }
    }
  }
  return chain;
}

struct FdEntry {
  double dt = 0.0;
  double mc_estimate = 0.0;
  double analytic = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
};

struct FdReport {
  std::vector<FdEntry> entries;
  bool passed = false;
};

/// Monte Carlo Dynkin quotient (E[fn(X_dt)] - fn(x)) / dt from one
/// Euler-Maruyama step under constant control u, compared with the analytic
/// generator. Fails when the analytic value lies outside 4 standard errors at
/// the smallest dt.
template <int N, int P, int D>
FdReport finite_difference_check(const SdeModel<N, P, D>& model, const SmoothFunction<N>& fn,
                                 const Vec<N>& x, const Vec<P>& u, const std::vector<double>& dt_list,
                                 int samples = 100000, std::uint64_t seed = 12345) {
  FdReport report;
  const double analytic = apply_generator(model, fn, x, u);
  const double f0 = fn.value(x);
  const Vec<N> mean_step = model.drift(x) + model.control_matrix(x) * u;
  const Mat<N, D> sigma = model.diffusion(x);
  double smallest = 0.0;
  for (std::size_t idx = 0; idx < dt_list.size(); ++idx) {
    const double dt = dt_list[idx];
    NoiseStream stream{seed, static_cast<std::uint32_t>(idx), 0};
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
      const Vec<D> dw = next_increment<D>(stream, dt);
      const Vec<N> next = x + mean_step * dt + sigma * dw;
      const double q = (fn.value(next) - f0) / dt;
      sum += q;
      sum_sq += q * q;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, (sum_sq - samples * mean * mean) / (samples - 1));
    FdEntry e{dt, mean, analytic, std::abs(mean - analytic), std::sqrt(var / samples)};
    report.entries.push_back(e);
    if (idx == 0 || dt < smallest) {
      smallest = dt;
      const double tol = std::max(4.0 * e.std_error, 1e-9 * (1.0 + std::abs(analytic)));
      report.passed = e.abs_error <= tol;
    }
  }
  return report;
}

}  // namespace ssk
