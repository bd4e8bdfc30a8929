#pragma once

#include <cmath>
#include <numbers>

#include "ssk/errors.hpp"
#include "ssk/generator.hpp"
#include "ssk/linalg.hpp"
#include "ssk/sde.hpp"

// Benchmark systems and their barrier / Lyapunov functions.

namespace ssk::models {

inline void require_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) throw ArgumentError(std::string(what) + " must be finite and >= 0");
}

// ---------------------------------------------------------------------------
// Adaptive cruise control: x = [v_follow, v_lead, gap].

struct AccParams {
  double f0 = 0.1;
  double f1 = 5.0;
  double f2 = 0.25;
  double mass = 1650.0;
  double gravity = 9.81;
  double desired_speed = 22.0;
  double headway = 1.8;  // tau
  double sigma1 = 1.0;   // on the follower velocity
  double sigma2 = 1.0;   // on the gap

  double drag(double v) const { return f0 + f1 * v + f2 * v * v; }

  void validate() const {
    if (!(mass > 0.0) || !(headway > 0.0) || !(gravity > 0.0)) {
      throw ArgumentError("ACC: mass, headway and gravity must be positive");
    }
    for (double v : {f0, f1, f2, desired_speed}) {
      if (!std::isfinite(v)) throw ArgumentError("ACC: parameters must be finite");
    }
    require_finite_nonneg(sigma1, "ACC sigma1");
    require_finite_nonneg(sigma2, "ACC sigma2");
  }
};

using AccModel = SdeModel<3, 1, 3>;

inline AccModel make_acc_model(const AccParams& p) {
  p.validate();
  return AccModel(
      [p](const Vec<3>& x) { return Vec<3>(-p.drag(x(0)) / p.mass, 0.0, x(1) - x(0)); },
      [p](const Vec<3>&) { return Mat<3, 1>(1.0 / p.mass, 0.0, 0.0); },
      [p](const Vec<3>&) {
        Mat<3, 3> s = Mat<3, 3>::Zero();
        s(0, 0) = p.sigma1;
        s(2, 2) = p.sigma2;
        return s;
      },
      Vec<3>(18.0, 10.0, 150.0));
}

/// Collision constraint h = gap - tau * v_follow.
inline SmoothFunction<3> acc_barrier(const AccParams& p) {
  const double tau = p.headway;
  return {[tau](const Vec<3>& x) { return x(2) - tau * x(0); },
          [tau](const Vec<3>&) { return Vec<3>(-tau, 0.0, 1.0); },
          [](const Vec<3>&) { return Mat<3, 3>::Zero().eval(); }};
}

/// V = (v_follow - v_desired)^2.
inline SmoothFunction<3> acc_lyapunov(const AccParams& p) {
  const double vd = p.desired_speed;
  return {[vd](const Vec<3>& x) { return (x(0) - vd) * (x(0) - vd); },
          [vd](const Vec<3>& x) { return Vec<3>(2.0 * (x(0) - vd), 0.0, 0.0); },
          [](const Vec<3>&) {
            Mat<3, 3> H = Mat<3, 3>::Zero();
            H(0, 0) = 2.0;
            return H;
          }};
}

// ---------------------------------------------------------------------------
// Differential-drive robot: x = [px, py, heading], control = angular rate.

struct UnicycleParams {
  double speed = 2.0;
  double radius = 3.0;
  double sigma1 = 0.1;
  double sigma2 = 0.1;

  void validate() const {
    if (!std::isfinite(speed) || !(radius > 0.0) || !std::isfinite(radius)) {
      throw ArgumentError("unicycle: speed must be finite and radius positive");
    }
    require_finite_nonneg(sigma1, "unicycle sigma1");
    require_finite_nonneg(sigma2, "unicycle sigma2");
  }
};

using UnicycleModel = SdeModel<3, 1, 3>;

inline UnicycleModel make_unicycle_model(const UnicycleParams& p) {
  p.validate();
  const double v = p.speed;
  return UnicycleModel(
      [v](const Vec<3>& x) { return Vec<3>(v * std::cos(x(2)), v * std::sin(x(2)), 0.0); },
      [](const Vec<3>&) { return Mat<3, 1>(0.0, 0.0, 1.0); },
      [p](const Vec<3>&) {
        Mat<3, 3> s = Mat<3, 3>::Zero();
        s(0, 0) = p.sigma1;
        s(1, 1) = p.sigma2;
        return s;
      });
}

/// Workspace disk h = r^2 - px^2 - py^2.
inline SmoothFunction<3> unicycle_barrier(const UnicycleParams& p) {
  const double r2 = p.radius * p.radius;
  return {[r2](const Vec<3>& x) { return r2 - x(0) * x(0) - x(1) * x(1); },
          [](const Vec<3>& x) { return Vec<3>(-2.0 * x(0), -2.0 * x(1), 0.0); },
          [](const Vec<3>&) {
            Mat<3, 3> H = Mat<3, 3>::Zero();
            H(0, 0) = -2.0;
            H(1, 1) = -2.0;
            return H;
          }};
}

/// b_1 = A h = -2v (px cos th + py sin th) - sigma1^2 - sigma2^2.
inline SmoothFunction<3> unicycle_b1(const UnicycleParams& p) {
  const double v = p.speed;
  const double noise = p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2;
  return {[v, noise](const Vec<3>& x) {
            return -2.0 * v * (x(0) * std::cos(x(2)) + x(1) * std::sin(x(2))) - noise;
          },
          [v](const Vec<3>& x) {
            const double c = std::cos(x(2)), s = std::sin(x(2));
            return Vec<3>(-2.0 * v * c, -2.0 * v * s, 2.0 * v * (x(0) * s - x(1) * c));
          },
          [v](const Vec<3>& x) {
            const double c = std::cos(x(2)), s = std::sin(x(2));
            Mat<3, 3> H = Mat<3, 3>::Zero();
            H(0, 2) = H(2, 0) = 2.0 * v * s;
            H(1, 2) = H(2, 1) = -2.0 * v * c;
            H(2, 2) = 2.0 * v * (x(0) * c + x(1) * s);
            return H;
          }};
}

/// Bounding box of the workspace disk, heading over one turn.
inline Box<3> unicycle_region(const UnicycleParams& p) {
  return {Vec<3>(-p.radius, -p.radius, -std::numbers::pi), Vec<3>(p.radius, p.radius, std::numbers::pi)};
}

// ---------------------------------------------------------------------------
// Planar single integrator with direct velocity control (relative degree 1
// for the disk constraint); optional radial drift px' = k px.

struct PlanarParams {
  double radius = 3.0;
  double drift_gain = 0.0;
  double sigma1 = 0.1;
  double sigma2 = 0.1;

  void validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(drift_gain)) {
      throw ArgumentError("planar: radius must be positive and drift gain finite");
    }
    require_finite_nonneg(sigma1, "planar sigma1");
    require_finite_nonneg(sigma2, "planar sigma2");
  }
};

using PlanarModel = SdeModel<2, 2, 2>;

inline PlanarModel make_planar_model(const PlanarParams& p) {
  p.validate();
  const double k = p.drift_gain;
  return PlanarModel([k](const Vec<2>& x) { return (k * x).eval(); },
                     [](const Vec<2>&) { return Mat<2, 2>::Identity().eval(); },
                     [p](const Vec<2>&) {
                       Mat<2, 2> s = Mat<2, 2>::Zero();
                       s(0, 0) = p.sigma1;
                       s(1, 1) = p.sigma2;
                       return s;
                     });
}

inline SmoothFunction<2> planar_barrier(const PlanarParams& p) {
  const double r2 = p.radius * p.radius;
  return {[r2](const Vec<2>& x) { return r2 - x.squaredNorm(); },
          [](const Vec<2>& x) { return (-2.0 * x).eval(); },
          [](const Vec<2>&) { return (-2.0 * Mat<2, 2>::Identity()).eval(); }};
}

// ---------------------------------------------------------------------------
// Scalar system dx = (x + u) dt + sigma dW with safe set {x < 1}.

using ScalarModel = SdeModel<1, 1, 1>;

inline ScalarModel make_scalar_model(double sigma) {
  require_finite_nonneg(sigma, "scalar sigma");
  return ScalarModel([](const Vec<1>& x) { return x; },
                     [](const Vec<1>&) { return Mat<1, 1>::Ones().eval(); },
                     [sigma](const Vec<1>&) { return Mat<1, 1>::Constant(sigma).eval(); });
}

inline SmoothFunction<1> scalar_barrier() {
  return {[](const Vec<1>& x) { return 1.0 - x(0); },
          [](const Vec<1>&) { return Vec<1>::Constant(-1.0).eval(); },
          [](const Vec<1>&) { return Mat<1, 1>::Zero().eval(); }};
}

// ---------------------------------------------------------------------------
// Geometric Brownian motion dx = a x dt + s x dW (uncontrolled test model).

inline ScalarModel make_gbm_model(double a, double s) {
  return ScalarModel([a](const Vec<1>& x) { return (a * x).eval(); },
                     [](const Vec<1>&) { return Mat<1, 1>::Zero().eval(); },
                     [s](const Vec<1>& x) { return (s * x).eval(); },
                     Vec<1>::Ones());
}

}  // namespace ssk::models
