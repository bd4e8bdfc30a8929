#include <gtest/gtest.h>

#include <random>

#include "ssk/certificates.hpp"
#include "ssk/generator.hpp"
#include "ssk/models.hpp"

using namespace ssk;

namespace {

SmoothFunction<1> square() {
  return {[](const Vec<1>& x) { return x(0) * x(0); }, [](const Vec<1>& x) { return (2.0 * x).eval(); },
          [](const Vec<1>&) { return Mat<1, 1>::Constant(2.0).eval(); }};
}

Vec<3> random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  return Vec<3>(u(rng), u(rng), u(rng));
}

}  // namespace

TEST(Generator, ScalarBarrierIsAffine) {
  const auto model = models::make_scalar_model(1.0);
  EXPECT_DOUBLE_EQ(apply_generator(model, models::scalar_barrier(), Vec<1>(0.5), Vec<1>::Zero()), -0.5);
}

TEST(Generator, ScalarReciprocalBarrier) {
  const auto model = models::make_scalar_model(1.0);
  const auto B = reciprocal(models::scalar_barrier());
  EXPECT_NEAR(apply_generator(model, B, Vec<1>(0.5), Vec<1>::Zero()), 10.0, 1e-12);
}

TEST(Generator, ZeroDiffusionIsLieDerivative) {
  models::UnicycleParams p;
  p.sigma1 = p.sigma2 = 0.0;
  const auto model = models::make_unicycle_model(p);
  const auto b1 = models::unicycle_b1(p);
  const Vec<3> x(0.4, -1.1, 0.7);
  const double u = 0.3;
  const double lie = b1.gradient(x).dot(model.drift(x) + model.control_matrix(x) * Vec<1>(u));
  EXPECT_DOUBLE_EQ(apply_generator(model, b1, x, Vec<1>(u)), lie);
}

TEST(Generator, DynamicOverloadChecksDimensions) {
  const auto model = models::make_scalar_model(1.0);
  EXPECT_THROW(apply_generator(model, square(), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)),
               ArgumentError);
  EXPECT_DOUBLE_EQ(apply_generator(model, square(), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)),
                   2.0 + 1.0);
}

TEST(Generator, HessianIsSymmetrized) {
  const auto model = models::make_unicycle_model({});
  SmoothFunction<3> skew{[](const Vec<3>&) { return 0.0; }, [](const Vec<3>&) { return Vec<3>::Zero().eval(); },
                         [](const Vec<3>&) {
                           Mat<3, 3> H = Mat<3, 3>::Zero();
                           H(0, 1) = 1.0;
                           H(1, 0) = -1.0;
                           return H;
                         }};
  EXPECT_EQ(decompose(model, skew, Vec<3>(1.0, 2.0, 3.0)).drift_part, 0.0);
}

TEST(Decompose, NoControlMatrixNoControlPart) {
  const auto model = models::make_gbm_model(0.05, 0.2);
  EXPECT_EQ(decompose(model, square(), Vec<1>(2.0)).control_part(0), 0.0);
}

TEST(Decompose, AccBarrierControlPart) {
  const models::AccParams p;
  const auto model = models::make_acc_model(p);
  const auto dec = decompose(model, models::acc_barrier(p), Vec<3>(18.0, 10.0, 150.0));
  EXPECT_NEAR(dec.control_part(0), -1.8 / 1650.0, 1e-18);
}

TEST(Decompose, UnicycleBarrierHasNoControlPart) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(decompose(model, models::unicycle_barrier(p), random_state(rng)).control_part(0), 0.0);
  }
}

TEST(Decompose, ExactOnRandomPoints) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto b1 = models::unicycle_b1(p);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uu(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const Vec<3> x = random_state(rng);
    const Vec<1> u(uu(rng));
    const double direct = apply_generator(model, b1, x, u);
    const auto dec = decompose(model, b1, x);
    EXPECT_LE(std::abs(direct - dec.at(u)), 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST(Generator, LinearInControlAndFunction) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto h = models::unicycle_barrier(p);
  const auto b1 = models::unicycle_b1(p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec<3> x = random_state(rng);
    const double a = w(rng);
    const Vec<1> u1(10.0 * w(rng) - 5.0), u2(10.0 * w(rng) - 5.0);
    const Vec<1> mix = a * u1 + (1.0 - a) * u2;
    const double lhs = apply_generator(model, b1, x, mix);
    const double rhs = a * apply_generator(model, b1, x, u1) + (1.0 - a) * apply_generator(model, b1, x, u2);
    EXPECT_NEAR(lhs, rhs, 1e-11 * (1.0 + std::abs(lhs)));
    const auto combo = linear_combination(a, h, 1.0 - a, b1);
    const double f_lhs = apply_generator(model, combo, x, u1);
    const double f_rhs = a * apply_generator(model, h, x, u1) + (1.0 - a) * apply_generator(model, b1, x, u1);
    EXPECT_NEAR(f_lhs, f_rhs, 1e-11 * (1.0 + std::abs(f_lhs)));
  }
}

TEST(Chain, RelativeDegreeOneIsJustH) {
  const models::PlanarParams p;
  const auto model = models::make_planar_model(p);
  const auto h = models::planar_barrier(p);
  const Box<2> region{Vec<2>(-3.0, -3.0), Vec<2>(3.0, 3.0)};
  const auto chain = build_chain(model, h, 1, region);
  ASSERT_EQ(chain.levels.size(), 1u);
  EXPECT_EQ(chain.relative_degree, 1);
  EXPECT_EQ(chain.top().value(Vec<2>(1.0, 1.0)), h.value(Vec<2>(1.0, 1.0)));
}

TEST(Chain, UnicycleSecondLevelFormula) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto region = models::unicycle_region(p);
  const auto chain = build_chain(model, models::unicycle_barrier(p), 2, region);
  ASSERT_EQ(chain.levels.size(), 2u);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec<3> x = random_state(rng);
    const double expected = -2.0 * p.speed * (x(0) * std::cos(x(2)) + x(1) * std::sin(x(2))) - 0.01 - 0.01;
    EXPECT_NEAR(chain.levels[1].value(x), expected, 1e-12);
    // Synthesized derivatives agree with the closed form.
    EXPECT_LE((chain.levels[1].gradient(x) - models::unicycle_b1(p).gradient(x)).norm(), 1e-6);
    EXPECT_LE((chain.levels[1].hessian(x) - models::unicycle_b1(p).hessian(x)).norm(), 1e-4);
  }
}

TEST(Chain, UnicycleTopLevelControlPart) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto dec = decompose(model, models::unicycle_b1(p), Vec<3>(1.0, 1.0, 0.0));
  EXPECT_DOUBLE_EQ(dec.control_part(0), -4.0);
}

TEST(Chain, SuppliedLevelsAreChecked) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto region = models::unicycle_region(p);
  const auto h = models::unicycle_barrier(p);
  EXPECT_NO_THROW(build_chain(model, h, 2, region, std::optional{std::vector{models::unicycle_b1(p)}}));
  auto wrong = models::unicycle_b1(p);
  wrong.value = [](const Vec<3>&) { return 1.0; };
  EXPECT_THROW(build_chain(model, h, 2, region, std::optional{std::vector{wrong}}), CertificateConstructionError);
  EXPECT_THROW(build_chain(model, h, 3, region), ArgumentError);
  EXPECT_THROW(build_chain(model, h, 0, region), ArgumentError);
}

TEST(Chain, RelativeDegreeViolationNamesLevel) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto region = models::unicycle_region(p);
  // Requesting degree 1 for the disk: control never enters h.
  try {
    build_chain(model, models::unicycle_barrier(p), 1, region);
    FAIL() << "expected construction error";
  } catch (const CertificateConstructionError& e) {
    EXPECT_EQ(e.level(), 0);
    EXPECT_EQ(e.state().size(), 3u);
  }
  // A barrier the heading enters directly has degree 1, not 2.
  SmoothFunction<3> heading{[](const Vec<3>& x) { return 9.0 - x(0) * x(0) - x(1) * x(1) - x(2); },
                            [](const Vec<3>& x) { return Vec<3>(-2.0 * x(0), -2.0 * x(1), -1.0); },
                            [](const Vec<3>&) {
                              Mat<3, 3> H = Mat<3, 3>::Zero();
                              H(0, 0) = H(1, 1) = -2.0;
                              return H;
                            }};
  try {
    build_chain(model, heading, 2, region);
    FAIL() << "expected construction error";
  } catch (const CertificateConstructionError& e) {
    EXPECT_EQ(e.level(), 0);
  }
}

TEST(SmoothFunctions, ShippedDerivativesConsistent) {
  const models::UnicycleParams up;
  const models::AccParams ap;
  std::mt19937_64 rng(6);
  std::vector<Vec<3>> probes;
  for (int i = 0; i < 64; ++i) probes.push_back(random_state(rng));
  EXPECT_TRUE(derivatives_consistent(models::unicycle_barrier(up), probes));
  EXPECT_TRUE(derivatives_consistent(models::unicycle_b1(up), probes));
  EXPECT_TRUE(derivatives_consistent(models::acc_barrier(ap), probes));
  EXPECT_TRUE(derivatives_consistent(models::acc_lyapunov(ap), probes));
  SmoothFunction<3> bad = models::unicycle_b1(up);
  bad.gradient = [](const Vec<3>&) { return Vec<3>::Ones().eval(); };
  EXPECT_FALSE(derivatives_consistent(bad, probes));
}

TEST(FiniteDifferenceCheck, ZeroNoiseLinearFunction) {
  models::UnicycleParams p;
  p.sigma1 = p.sigma2 = 0.0;
  const auto model = models::make_unicycle_model(p);
  const auto rep = finite_difference_check(model, models::unicycle_barrier(p), Vec<3>(1.0, 0.5, 0.3),
                                           Vec<1>(0.2), {1e-2, 1e-3, 1e-4}, 1000);
  ASSERT_EQ(rep.entries.size(), 3u);
  // Deterministic bias shrinks linearly with dt.
  EXPECT_LT(rep.entries[2].abs_error, rep.entries[1].abs_error);
  EXPECT_LT(rep.entries[2].abs_error, 1e-3);
  EXPECT_LE(rep.entries[2].std_error, 1e-6);
}

TEST(FiniteDifferenceCheck, GbmSquare) {
  const double a = 0.05, s = 0.2;
  const auto model = models::make_gbm_model(a, s);
  const auto rep = finite_difference_check(model, square(), Vec<1>(1.0), Vec<1>(0.0), {1e-4});
  EXPECT_NEAR(rep.entries[0].analytic, 2.0 * a + s * s, 1e-15);
  EXPECT_TRUE(rep.passed) << rep.entries[0].mc_estimate << " vs " << rep.entries[0].analytic;
}

TEST(FiniteDifferenceCheck, UnicycleB1) {
  const models::UnicycleParams p;
  const auto model = models::make_unicycle_model(p);
  const auto rep =
      finite_difference_check(model, models::unicycle_b1(p), Vec<3>(1.0, 1.0, 0.0), Vec<1>(0.0), {1e-4});
  EXPECT_TRUE(rep.passed) << rep.entries[0].mc_estimate << " vs " << rep.entries[0].analytic;
}

TEST(FiniteDifferenceCheck, FlagsWrongGenerator) {
  const auto model = models::make_scalar_model(1.0);
  auto B = reciprocal(models::scalar_barrier());
  // Doubling the curvature reproduces the 2 sigma^2 / h^3 coefficient, which the MC quotient rejects.
  auto doubled = B;
  doubled.hessian = [B](const Vec<1>& x) { return (2.0 * B.hessian(x)).eval(); };
  const auto ok = finite_difference_check(model, B, Vec<1>(0.5), Vec<1>(0.0), {1e-4});
  const auto bad = finite_difference_check(model, doubled, Vec<1>(0.5), Vec<1>(0.0), {1e-4});
  EXPECT_TRUE(ok.passed);
  EXPECT_FALSE(bad.passed);
}
