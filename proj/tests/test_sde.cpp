#include <gtest/gtest.h>

#include <cmath>

#include "ssk/models.hpp"
#include "ssk/sde.hpp"

using namespace ssk;

namespace {

using Zero3 = SdeModel<3, 1, 3>;

Zero3 zero_model() {
  return Zero3([](const Vec<3>&) { return Vec<3>::Zero().eval(); },
               [](const Vec<3>&) { return Mat<3, 1>::Zero().eval(); },
               [](const Vec<3>&) { return Mat<3, 3>::Zero().eval(); });
}

struct ZeroControl {
  template <int N>
  Vec<1> operator()(const State<N>&) const { return Vec<1>::Zero(); }
};

auto always_inside = [](const auto&) { return true; };

// Mean of X_T over `paths` GBM paths and its standard error.
std::pair<double, double> gbm_mean(double a, double s, double dt, int paths) {
  const auto model = models::make_gbm_model(a, s);
  double sum = 0.0, sum_sq = 0.0;
  State<1> x0;
  x0.values(0) = 1.0;
  for (int i = 0; i < paths; ++i) {
    double last = 0.0;
    integrate(model, ZeroControl{}, x0, 1.0, dt, NoiseStream{77, static_cast<std::uint32_t>(i), 0}, false,
              always_inside, [&](std::size_t, const State<1>& x, const Vec<1>&) { last = x.values(0); });
    sum += last;
    sum_sq += last * last;
  }
  const double mean = sum / paths;
  const double var = (sum_sq - paths * mean * mean) / (paths - 1);
  return {mean, std::sqrt(var / paths)};
}

}  // namespace

TEST(EulerMaruyama, ZeroDynamicsKeepState) {
  const auto model = zero_model();
  State<3> x;
  x.values << 1.0, -2.0, 3.0;
  x.time = 0.25;
  const auto next = euler_maruyama_step(model, x, Vec<1>(5.0), Vec<3>(1.0, 1.0, 1.0), 0.01);
  EXPECT_EQ(next.values, x.values);
  EXPECT_DOUBLE_EQ(next.time, 0.26);
}

TEST(EulerMaruyama, AccDragStep) {
  const models::AccParams p;
  const auto model = models::make_acc_model(p);
  State<3> x;
  x.values << 18.0, 10.0, 150.0;
  const auto next = euler_maruyama_step(model, x, Vec<1>::Zero(), Vec<3>::Zero(), 0.0005);
  EXPECT_NEAR(x.values(0) - next.values(0), 171.1 / 1650.0 * 0.0005, 1e-15);
  EXPECT_NEAR(next.values(2), 150.0 + (10.0 - 18.0) * 0.0005, 1e-12);
}

TEST(EulerMaruyama, DimensionAndDtChecks) {
  const auto model = zero_model();
  State<3> x;
  EXPECT_THROW(euler_maruyama_step(model, x, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), 0.1),
               ArgumentError);
  EXPECT_THROW(euler_maruyama_step(model, x, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(2), 0.1),
               ArgumentError);
  EXPECT_THROW(euler_maruyama_step(model, x, Vec<1>::Zero(), Vec<3>::Zero(), 0.0), ArgumentError);
}

TEST(EulerMaruyama, NonFiniteResultCarriesState) {
  const auto model = models::make_scalar_model(0.0);
  State<1> x;
  x.values(0) = 1.0;
  try {
    euler_maruyama_step(model, x, Vec<1>(std::numeric_limits<double>::infinity()), Vec<1>::Zero(), 0.1);
    FAIL() << "expected overflow error";
  } catch (const NumericalOverflowError& e) {
    ASSERT_EQ(e.state().size(), 1u);
    EXPECT_EQ(e.state()[0], 1.0);
  }
}

TEST(SdeModel, RejectsNonFiniteProbe) {
  auto make = [] {
    return SdeModel<1, 1, 1>([](const Vec<1>& x) { return (x / 0.0).eval(); },
                             [](const Vec<1>&) { return Mat<1, 1>::Ones().eval(); },
                             [](const Vec<1>&) { return Mat<1, 1>::Ones().eval(); });
  };
  EXPECT_THROW(make(), ArgumentError);
}

TEST(Simulate, SingleStepHasTwoStates) {
  const auto model = models::make_scalar_model(1.0);
  State<1> x0;
  const auto traj = simulate(model, ZeroControl{}, x0, 0.01, 0.01, NoiseStream{1, 0, 0}, true, always_inside);
  EXPECT_EQ(traj.states.size(), 2u);
  EXPECT_EQ(traj.controls.size(), 1u);
  EXPECT_TRUE(traj.safe);
  EXPECT_FALSE(traj.exit_time);
}

TEST(Simulate, GridSpacingAndCounts) {
  const auto model = models::make_scalar_model(1.0);
  State<1> x0;
  const auto traj = simulate(model, ZeroControl{}, x0, 1.0, 0.001, NoiseStream{1, 0, 0}, true, always_inside);
  ASSERT_EQ(traj.states.size(), 1001u);
  EXPECT_EQ(traj.controls.size(), traj.states.size() - 1);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    EXPECT_DOUBLE_EQ(traj.states[k].time, static_cast<double>(k) * 0.001);
  }
  EXPECT_THROW(simulate(model, ZeroControl{}, x0, 0.0005, 0.001, NoiseStream{}, true, always_inside),
               ArgumentError);
}

TEST(Simulate, UnicycleExitsNearBoundary) {
  models::UnicycleParams p;
  p.sigma1 = p.sigma2 = 0.0;
  const auto model = models::make_unicycle_model(p);
  const auto h = models::unicycle_barrier(p);
  State<3> x0;
  x0.values << 2.999, 0.0, 0.0;
  const double dt = 0.0005;
  const auto traj = simulate(model, ZeroControl{}, x0, 1.0, dt, NoiseStream{1, 0, 0}, true,
                             [&](const Vec<3>& x) { return h.value(x) > 0.0; });
  ASSERT_TRUE(traj.exit_time);
  EXPECT_FALSE(traj.safe);
  EXPECT_GE(*traj.exit_time, 0.0005 - 1e-15);
  EXPECT_LE(*traj.exit_time, 0.0005 + dt * std::ceil(0.001 / (2.0 * dt)) + 1e-15);
  EXPECT_EQ(traj.states.back().time, *traj.exit_time);
}

TEST(Simulate, ContinuesAfterExitWhenAsked) {
  const auto model = models::make_scalar_model(0.0);
  State<1> x0;
  x0.values(0) = 0.5;
  const auto traj = simulate(model, ZeroControl{}, x0, 1.0, 0.01, NoiseStream{}, false,
                             [](const Vec<1>& x) { return x(0) < 0.6; });
  ASSERT_TRUE(traj.exit_time);
  EXPECT_FALSE(traj.safe);
  EXPECT_EQ(traj.states.size(), 101u);
}

TEST(Simulate, ControllerFailureCarriesStep) {
  const auto model = models::make_scalar_model(0.0);
  State<1> x0;
  int calls = 0;
  auto bad = [&](const State<1>&) -> Vec<1> {
    if (++calls == 4) throw std::runtime_error("boom");
    return Vec<1>::Zero();
  };
  try {
    simulate(model, bad, x0, 1.0, 0.01, NoiseStream{}, true, always_inside);
    FAIL() << "expected controller error";
  } catch (const ControllerError& e) {
    EXPECT_EQ(e.step(), 3u);
  }
}

TEST(Simulate, Deterministic) {
  const auto model = models::make_unicycle_model({});
  State<3> x0;
  x0.values << 0.0, 1.5, -1.2;
  auto ctl = [](const State<3>& s) { return Vec<1>(std::sin(s.values(2))); };
  const auto a = simulate(model, ctl, x0, 0.5, 0.0005, NoiseStream{5, 3, 0}, true, always_inside);
  const auto b = simulate(model, ctl, x0, 0.5, 0.0005, NoiseStream{5, 3, 0}, true, always_inside);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) EXPECT_EQ(a.states[k].values, b.states[k].values);
}

TEST(Simulate, ZeroNoiseMatchesExplicitEuler) {
  const models::AccParams p{};
  auto q = p;
  q.sigma1 = q.sigma2 = 0.0;
  const auto model = models::make_acc_model(q);
  State<3> x0;
  x0.values << 18.0, 10.0, 150.0;
  auto ctl = [](const State<3>& s) { return Vec<1>(100.0 * (22.0 - s.values(0))); };
  const auto traj = simulate(model, ctl, x0, 1.0, 0.0005, NoiseStream{1, 0, 0}, true, always_inside);
  Vec<3> x = x0.values;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const Vec<1> u(100.0 * (22.0 - x(0)));
    x = x + (model.drift(x) + model.control_matrix(x) * u) * 0.0005;
    ASSERT_EQ(traj.states[k].values, x) << "step " << k;
  }
}

TEST(Simulate, GbmMeanMatchesMoment) {
  const auto [mean, se] = gbm_mean(0.05, 0.2, 0.001, 100000);
  EXPECT_NEAR(mean, std::exp(0.05), 3.0 * se);
}

TEST(Simulate, WeakErrorShrinksWithDt) {
  const double exact = std::exp(0.05);
  const auto [m2, se2] = gbm_mean(0.05, 0.2, 0.002, 100000);
  const auto [m1, se1] = gbm_mean(0.05, 0.2, 0.001, 100000);
  EXPECT_LE(std::abs(m1 - exact), std::abs(m2 - exact) + 3.0 * std::hypot(se1, se2));
}
