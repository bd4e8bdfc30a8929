#include <gtest/gtest.h>

#include <random>

#include "oracles/qp_random.hpp"
#include "ssk/qp.hpp"

using namespace ssk;

namespace {

AffineConstraint row1(double coeff, Sense sense, double rhs, int level = 0) {
  AffineConstraint r;
  r.control_coeffs = SmallVec::Constant(1, coeff);
  r.sense = sense;
  r.rhs = rhs;
  r.label = {"row", level};
  return r;
}

double stationarity(const QpProblem& q, const QpSolution& s) {
  const int p = q.num_controls;
  SmallVec g(q.num_vars());
  g.head(p) = q.weight_u.cwiseProduct(s.u);
  if (q.slack_present) g(p) = q.weight_slack * *s.slack;
  for (std::size_t k = 0; k < s.active_set.size(); ++k) {
    const auto& lab = s.active_set[k];
    SmallVec a = SmallVec::Zero(q.num_vars());
    if (lab.name == "box_lo") a(lab.level) = 1.0;
    else if (lab.name == "box_hi") a(lab.level) = -1.0;
    else {
      const auto& r = q.rows[static_cast<std::size_t>(lab.level)];
      a.head(p) = r.control_coeffs;
      if (q.slack_present) a(p) = r.slack_coeff;
      if (r.sense == Sense::kLessEqual) a = -a;
    }
    g -= s.multipliers[k] * a;
  }
  return g.norm();
}

}  // namespace

TEST(Qp, NoRowsGivesOrigin) {
  auto q = QpProblem::make(1, true);
  const auto s = solve(q);
  EXPECT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_EQ(s.u(0), 0.0);
  ASSERT_TRUE(s.slack);
  EXPECT_EQ(*s.slack, 0.0);
  EXPECT_EQ(s.objective, 0.0);
  EXPECT_TRUE(s.active_set.empty());
}

TEST(Qp, SingleHalfSpaceProjection) {
  auto q = QpProblem::make(1, false);
  q.rows.push_back(row1(1.0, Sense::kGreaterEqual, 3.0));
  const auto s = solve(q);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_DOUBLE_EQ(s.u(0), 3.0);
  EXPECT_DOUBLE_EQ(s.objective, 4.5);
  ASSERT_EQ(s.active_set.size(), 1u);
  EXPECT_EQ(s.active_set[0], (RowLabel{"row", 0}));
  EXPECT_NEAR(s.multipliers[0], 3.0, 1e-12);
  EXPECT_LE(s.kkt_residual, 1e-8);
}

TEST(Qp, ConflictingRowsReportInfeasible) {
  auto q = QpProblem::make(1, false);
  q.rows.push_back(row1(1.0, Sense::kLessEqual, -2.0, 0));
  q.rows.push_back(row1(1.0, Sense::kGreaterEqual, -0.5, 1));
  q.rows.push_back(row1(1.0, Sense::kLessEqual, 100.0, 2));
  const auto s = solve(q);
  EXPECT_EQ(s.status, QpStatus::kInfeasible);
  ASSERT_EQ(s.conflicting.size(), 2u);
  EXPECT_EQ(s.conflicting[0], (RowLabel{"row", 0}));
  EXPECT_EQ(s.conflicting[1], (RowLabel{"row", 1}));
}

TEST(Qp, RowAgainstBoxIsInfeasible) {
  auto q = QpProblem::make(1, false);
  q.rows.push_back(row1(1.0, Sense::kLessEqual, -2.0));
  q.box = std::vector<Bounds1D>{{-0.5, 1.0}};
  const auto s = solve(q);
  EXPECT_EQ(s.status, QpStatus::kInfeasible);
  ASSERT_EQ(s.conflicting.size(), 1u);
}

TEST(Qp, SlackAbsorbsClfRow) {
  // u >= 1 hard, u - delta <= -1 soft: minimizer u = 1, delta = 2 or split.
  auto q = QpProblem::make(1, true);
  q.rows.push_back(row1(1.0, Sense::kGreaterEqual, 1.0, 0));
  auto clf = row1(1.0, Sense::kLessEqual, -1.0, 1);
  clf.slack_coeff = -1.0;
  q.rows.push_back(clf);
  const auto s = solve(q);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.u(0), 1.0, 1e-12);
  EXPECT_NEAR(*s.slack, 2.0, 1e-12);
  EXPECT_LE(s.kkt_residual, 1e-8);
}

TEST(Qp, InvalidWeightsAndBoxRejected) {
  auto q = QpProblem::make(1, false);
  q.weight_u(0) = 0.0;
  EXPECT_THROW(solve(q), ArgumentError);
  q = QpProblem::make(1, false);
  q.box = std::vector<Bounds1D>{{1.0, -1.0}};
  EXPECT_THROW(solve(q), ArgumentError);
}

TEST(Qp, ScalingCovariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    auto q = oracle::random_qp(rng);
    const auto s = solve(q);
    if (q.rows.empty()) continue;
    auto scaled = q;
    auto& r = scaled.rows[static_cast<std::size_t>(t) % scaled.rows.size()];
    const double c = 0.1 + 10.0 * (t % 7);
    r.control_coeffs *= c;
    r.slack_coeff *= c;
    r.rhs *= c;
    const auto s2 = solve(scaled);
    ASSERT_EQ(s.status, s2.status);
    EXPECT_LE((s.u - s2.u).norm(), 1e-9 * (1.0 + s.u.norm()));
    EXPECT_NEAR(s.objective, s2.objective, 1e-9 * (1.0 + s.objective));
  }
}

TEST(Qp, DeterministicIncludingActiveSet) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto q = oracle::random_qp(rng);
    const auto a = solve(q);
    const auto b = solve(q);
    ASSERT_EQ(a.status, b.status);
    for (Eigen::Index i = 0; i < a.u.size(); ++i) EXPECT_EQ(a.u(i), b.u(i));
    EXPECT_EQ(a.active_set, b.active_set);
    EXPECT_EQ(a.multipliers, b.multipliers);
  }
}

TEST(Qp, DuplicateRowsTieBreakToLowestIndex) {
  auto q = QpProblem::make(1, false);
  q.rows.push_back(row1(1.0, Sense::kGreaterEqual, 2.0, 0));
  q.rows.push_back(row1(2.0, Sense::kGreaterEqual, 4.0, 1));
  const auto s = solve(q);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.u(0), 2.0, 1e-12);
  // Both rows are tight; the multiplier sits on the first one.
  ASSERT_EQ(s.active_set.size(), 2u);
  EXPECT_NEAR(s.multipliers[0], 2.0, 1e-12);
  EXPECT_EQ(s.multipliers[1], 0.0);
}

TEST(Qp, KktCertificateOnRandomProblems) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const auto q = oracle::random_qp(rng);
    const auto s = solve(q);
    ASSERT_EQ(s.status, QpStatus::kOptimal) << "problem " << t;
    EXPECT_LE(s.kkt_residual, 1e-8);
    EXPECT_LE(stationarity(q, s), 1e-8);
    for (double l : s.multipliers) EXPECT_GE(l, -1e-12);
    for (const auto& r : q.rows) EXPECT_TRUE(r.satisfied(s.u, s.slack.value_or(0.0), 1e-9));
    for (Eigen::Index i = 0; i < s.u.size(); ++i) {
      EXPECT_GE(s.u(i), -oracle::kControlBox - 1e-9);
      EXPECT_LE(s.u(i), oracle::kControlBox + 1e-9);
    }
  }
}

TEST(Qp, MatchesGridOracle) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    const auto q = oracle::random_qp(rng, 2);
    const auto s = solve(q);
    const auto c = oracle::compare_with_grid(q, s);
    EXPECT_TRUE(c.ok) << "problem " << t << ": " << c.why << " solver=" << c.solver << " grid=" << c.grid
                      << " bound=" << c.bound;
  }
}

TEST(Saturate, ClampsComponentwise) {
  const std::vector<Bounds1D> box{{-1.0, 1.0}, {0.0, 2.0}};
  SmallVec u(2);
  u << 0.5, 1.0;
  EXPECT_EQ(saturate(u, box), u);
  u << -3.0, 5.0;
  const auto v = saturate(u, box);
  EXPECT_EQ(v(0), -1.0);
  EXPECT_EQ(v(1), 2.0);
  u << -1.0, 0.0;
  EXPECT_EQ(saturate(u, box), u);
}

TEST(Saturate, AccScaledLowerBound) {
  const double mg = 1650.0 * 9.81;
  const std::vector<Bounds1D> box{{-0.5 * mg, std::numeric_limits<double>::infinity()}};
  SmallVec u = SmallVec::Constant(1, -0.7 * mg);
  EXPECT_DOUBLE_EQ(saturate(u, box)(0), -0.5 * mg);
  EXPECT_THROW(saturate(SmallVec::Zero(2), box), ArgumentError);
}
