#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssk/errors.hpp"
#include "ssk/linalg.hpp"
#include "ssk/noise.hpp"

namespace ssk {

template <int N>
struct State {
  Vec<N> values = Vec<N>::Zero();
  double time = 0.0;
};

/// Control-affine Ito SDE  dX = (f(X) + g(X) u) dt + sigma(X) dW
/// with n = N states, p = P controls and d = D Brownian components.
template <int N, int P, int D>
class SdeModel {
 public:
  static constexpr int kStateDim = N;
  static constexpr int kControlDim = P;
  static constexpr int kNoiseDim = D;

  using StateVec = Vec<N>;
  using ControlVec = Vec<P>;
  using NoiseVec = Vec<D>;
  using DriftFn = std::function<Vec<N>(const Vec<N>&)>;
  using ControlMatrixFn = std::function<Mat<N, P>(const Vec<N>&)>;
  using DiffusionFn = std::function<Mat<N, D>(const Vec<N>&)>;

  /// Evaluates all three maps at `probe` and rejects non-finite output.
  SdeModel(DriftFn drift, ControlMatrixFn control_matrix, DiffusionFn diffusion,
           const Vec<N>& probe = Vec<N>::Zero())
      : drift_(std::move(drift)),
        control_matrix_(std::move(control_matrix)),
        diffusion_(std::move(diffusion)) {
    if (!drift_ || !control_matrix_ || !diffusion_) {
      throw ArgumentError("SdeModel: drift, control matrix and diffusion are all required");
    }
    if (!all_finite(drift_(probe)) || !all_finite(control_matrix_(probe)) ||
        !all_finite(diffusion_(probe))) {
      throw ArgumentError("SdeModel: model maps are not finite at the probe state");
    }
  }

  Vec<N> drift(const Vec<N>& x) const { return drift_(x); }
  Mat<N, P> control_matrix(const Vec<N>& x) const { return control_matrix_(x); }
  Mat<N, D> diffusion(const Vec<N>& x) const { return diffusion_(x); }

 private:
  DriftFn drift_;
  ControlMatrixFn control_matrix_;
  DiffusionFn diffusion_;
};

template <int N, int P>
struct Trajectory {
  std::vector<State<N>> states;
  std::vector<Vec<P>> controls;
  double dt = 0.0;
  std::optional<double> exit_time;
  bool safe = true;
};

/// x + (f(x) + g(x) u) dt + sigma(x) dw, time advanced by dt.
template <int N, int P, int D>
State<N> euler_maruyama_step(const SdeModel<N, P, D>& model, const State<N>& x, const Vec<P>& u,
                             const Vec<D>& dw, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("euler_maruyama_step: dt must be positive");
  State<N> next;
  next.values = x.values + (model.drift(x.values) + model.control_matrix(x.values) * u) * dt +
                model.diffusion(x.values) * dw;
  next.time = x.time + dt;
  if (!all_finite(next.values)) {
    throw NumericalOverflowError("euler_maruyama_step: non-finite state at t=" +
                                     std::to_string(next.time),
                                 to_std(x.values));
  }
  return next;
}

/// Runtime-sized overload for callers holding dynamic vectors.
template <int N, int P, int D>
State<N> euler_maruyama_step(const SdeModel<N, P, D>& model, const State<N>& x,
                             const Eigen::VectorXd& u, const Eigen::VectorXd& dw, double dt) {
  if (u.size() != P || dw.size() != D) {
    throw ArgumentError("euler_maruyama_step: control or noise dimension mismatch");
  }
  return euler_maruyama_step(model, x, Vec<P>(u), Vec<D>(dw), dt);
}

inline std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= dt) || !std::isfinite(horizon)) {
    throw ArgumentError("simulate: need T >= dt > 0");
  }
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

/// Integrates one path, invoking `observer(step, state, control)` after each step
/// (step counts from 1; the control is the one applied over the preceding interval).
/// Returns the exit time, if any. States sit on the grid t_k = t_0 + k dt.
template <int N, int P, int D, typename Controller, typename ExitTest, typename Observer>
std::optional<double> integrate(const SdeModel<N, P, D>& model, Controller&& controller,
                                const State<N>& x0, double horizon, double dt, NoiseStream stream,
                                bool stop_on_exit, ExitTest&& inside, Observer&& observer) {
  const std::size_t steps = step_count(horizon, dt);
  std::optional<double> exit_time;
  if (!inside(x0.values)) {
    exit_time = x0.time;
    if (stop_on_exit) return exit_time;
  }
  State<N> x = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    Vec<P> u;
    try {
      u = controller(x);
    } catch (const std::exception& e) {
      throw ControllerError(std::string("controller failed at step ") + std::to_string(k - 1) +
                                ": " + e.what(),
                            k - 1);
    }
    const Vec<D> dw = next_increment<D>(stream, dt);
    x = euler_maruyama_step(model, x, u, dw, dt);
    x.time = x0.time + static_cast<double>(k) * dt;
    observer(k, x, u);
    if (!exit_time && !inside(x.values)) {
      exit_time = x.time;
      if (stop_on_exit) break;
    }
  }
  return exit_time;
}

/// Rolls out a full path and records every state and applied control.
template <int N, int P, int D, typename Controller, typename ExitTest>
Trajectory<N, P> simulate(const SdeModel<N, P, D>& model, Controller&& controller,
                          const State<N>& x0, double horizon, double dt, NoiseStream stream,
                          bool stop_on_exit, ExitTest&& inside) {
  Trajectory<N, P> traj;
  traj.dt = dt;
  traj.states.reserve(step_count(horizon, dt) + 1);
  traj.states.push_back(x0);
  traj.exit_time = integrate(model, std::forward<Controller>(controller), x0, horizon, dt, stream,
                             stop_on_exit, std::forward<ExitTest>(inside),
                             [&](std::size_t, const State<N>& x, const Vec<P>& u) {
                               traj.states.push_back(x);
                               traj.controls.push_back(u);
                             });
  traj.safe = !traj.exit_time.has_value();
  return traj;
}

}  // namespace ssk
