#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssk/certificates.hpp"
#include "ssk/errors.hpp"
#include "ssk/linalg.hpp"

namespace ssk {

struct Bounds1D {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// min 1/2 sum_i w_i u_i^2 + 1/2 w_delta delta^2  subject to `rows` and `box`.
struct QpProblem {
  int num_controls = 1;
  bool slack_present = false;
  SmallVec weight_u = SmallVec::Ones(1);
  double weight_slack = 1.0;
  std::vector<AffineConstraint> rows;
  std::optional<std::vector<Bounds1D>> box;

  static QpProblem make(int p, bool slack) {
    QpProblem q;
    q.num_controls = p;
    q.slack_present = slack;
    q.weight_u = SmallVec::Ones(p);
    return q;
  }
  int num_vars() const { return num_controls + (slack_present ? 1 : 0); }
};

enum class QpStatus { kOptimal, kInfeasible, kDegenerateRowDropped };

inline std::string_view status_name(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kDegenerateRowDropped: return "degenerate_row_dropped";
  }
  return "?";
}

struct QpSolution {
  SmallVec u;
  std::optional<double> slack;
  double objective = 0.0;
  std::vector<RowLabel> active_set;
  /// Multipliers of the rows in `active_set`, in the same order (>= 0).
  std::vector<double> multipliers;
  double kkt_residual = 0.0;
  QpStatus status = QpStatus::kOptimal;
  /// Irreducible infeasible subset (reported when there are at most 4 rows).
  std::vector<RowLabel> conflicting;
};

inline constexpr double kQpFeasTol = 1e-9;

namespace detail {

inline constexpr int kMaxQpConstraints = 24;

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDecisionVars,
                               kMaxDecisionVars>;

/// a . z >= b, in the common orientation.
struct NormalRow {
  SmallVec a;
  double b = 0.0;
  RowLabel label;
};

inline RowLabel box_label(bool upper, int i) { return {upper ? "box_hi" : "box_lo", i}; }

inline void normalize(const QpProblem& q, std::vector<NormalRow>& out, bool include_box = true) {
  const int n = q.num_vars();
  out.clear();
  for (const auto& r : q.rows) {
    if (r.control_coeffs.size() != q.num_controls) {
      throw ArgumentError("QP row " + r.label.str() + " has the wrong number of control coefficients");
    }
    if (r.slack_coeff != 0.0 && !q.slack_present) {
      throw ArgumentError("QP row " + r.label.str() + " uses a slack the problem does not have");
    }
    if (!r.control_coeffs.allFinite() || !std::isfinite(r.slack_coeff) || !std::isfinite(r.rhs)) {
      throw ArgumentError("QP row " + r.label.str() + " is not finite");
    }
    NormalRow nr;
    nr.a = SmallVec::Zero(n);
    nr.a.head(q.num_controls) = r.control_coeffs;
    if (q.slack_present) nr.a(q.num_controls) = r.slack_coeff;
    nr.b = r.rhs;
    if (r.sense == Sense::kLessEqual) {
      nr.a = -nr.a;
      nr.b = -nr.b;
    }
    nr.label = r.label;
    out.push_back(nr);
  }
  if (include_box && q.box) {
    for (int i = 0; i < q.num_controls; ++i) {
      const auto& bx = (*q.box)[static_cast<std::size_t>(i)];
      if (std::isfinite(bx.lo)) {
        NormalRow nr{SmallVec::Zero(n), bx.lo, box_label(false, i)};
        nr.a(i) = 1.0;
        out.push_back(nr);
      }
      if (std::isfinite(bx.hi)) {
        NormalRow nr{SmallVec::Zero(n), -bx.hi, box_label(true, i)};
        nr.a(i) = -1.0;
        out.push_back(nr);
      }
    }
  }
  if (static_cast<int>(out.size()) > kMaxQpConstraints) {
    throw ArgumentError("QP has too many constraints for active-set enumeration");
  }
}

inline double row_scale(const NormalRow& r, const SmallVec& z) {
  return 1.0 + std::abs(r.b) + r.a.cwiseAbs().dot(z.cwiseAbs());
}

struct Candidate {
  SmallVec z;
  SmallVec lambda;  // multipliers of the subset rows
  double objective = 0.0;
  bool dual_feasible = false;
};

/// Closed-form minimizer of 1/2 z'Wz on {A_S z = b_S}; nullopt when A_S is rank deficient.
inline std::optional<Candidate> solve_equality(const SmallVec& w_inv, const std::vector<NormalRow>& rows,
                                               const int* subset, int k) {
  const int n = static_cast<int>(w_inv.size());
  Candidate c;
  if (k == 0) {
    c.z = SmallVec::Zero(n);
    c.lambda = SmallVec::Zero(0);
    c.dual_feasible = true;
    return c;
  }
  // Rows are scaled to unit norm before factoring so that the rank test is not
  // fooled by coefficients of very different magnitude.
  SmallMat A(k, n);
  SmallVec b(k);
  SmallVec d(k);
  for (int i = 0; i < k; ++i) {
    const auto& r = rows[static_cast<std::size_t>(subset[i])];
    const double nrm = r.a.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return std::nullopt;
    d(i) = 1.0 / nrm;
    A.row(i) = d(i) * r.a.transpose();
    b(i) = d(i) * r.b;
  }
  const SmallMat AWi = A * w_inv.asDiagonal();
  const SmallMat M = AWi * A.transpose();
  Eigen::FullPivLU<SmallMat> lu(M);
  lu.setThreshold(1e-12);
  if (lu.rank() < k) return std::nullopt;
  const SmallVec mu = lu.solve(b);
  if (!mu.allFinite()) return std::nullopt;
  c.z = AWi.transpose() * mu;
  c.lambda = d.cwiseProduct(mu);
  c.dual_feasible = (c.lambda.array() >= -1e-12 * (1.0 + c.lambda.cwiseAbs().maxCoeff())).all();
  return c;
}

inline bool primal_feasible(const std::vector<NormalRow>& rows, const SmallVec& z) {
  for (const auto& r : rows) {
    if (r.a.dot(z) < r.b - kQpFeasTol * row_scale(r, z)) return false;
  }
  return true;
}

/// Visits subsets of {0..m-1} of size 0..max_k in (size, lexicographic) order.
template <typename Fn>
void for_each_subset(int m, int max_k, Fn&& fn) {
  int idx[kMaxDecisionVars + 1];
  for (int k = 0; k <= std::min(m, max_k); ++k) {
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      fn(static_cast<const int*>(idx), k);
      int pos = k - 1;
      while (pos >= 0 && idx[pos] == m - k + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
}

struct EnumerationResult {
  std::optional<Candidate> best;
  int subset[kMaxDecisionVars] = {};
  int k = 0;
};

inline EnumerationResult enumerate_active_sets(const SmallVec& w_inv, const std::vector<NormalRow>& rows) {
  EnumerationResult res;
  const int n = static_cast<int>(w_inv.size());
  for_each_subset(static_cast<int>(rows.size()), n, [&](const int* subset, int k) {
    auto cand = solve_equality(w_inv, rows, subset, k);
    if (!cand || !primal_feasible(rows, cand->z)) return;
    cand->objective = 0.5 * cand->z.cwiseProduct(w_inv.cwiseInverse()).dot(cand->z);
    bool take = !res.best;
    if (res.best) {
      const double tie = 1e-12 * (1.0 + std::abs(res.best->objective));
      take = cand->objective < res.best->objective - tie ||
             (cand->objective <= res.best->objective + tie && cand->dual_feasible &&
              !res.best->dual_feasible);
    }
    if (take) {
      res.best = std::move(cand);
      res.k = k;
      std::copy(subset, subset + k, res.subset);
    }
  });
  return res;
}

}  // namespace detail

/// Primal active-set enumeration over subsets of at most (num_vars) rows.
/// Each subset's equality-constrained problem is solved in closed form; the
/// cheapest primal-feasible candidate wins (ties: dual-feasible first, then
/// lowest (size, lexicographic) subset).
inline QpSolution solve(const QpProblem& q) {
  const int p = q.num_controls;
  const int n = q.num_vars();
  if (p < 1 || n > kMaxDecisionVars) throw ArgumentError("QP: unsupported number of decision variables");
  if (q.weight_u.size() != p || !(q.weight_u.array() > 0.0).all() || !(q.weight_slack > 0.0)) {
    throw ArgumentError("QP: weights must be strictly positive");
  }
  if (q.box) {
    if (static_cast<int>(q.box->size()) != p) throw ArgumentError("QP: box size mismatch");
    for (const auto& b : *q.box) {
      if (!(b.lo <= b.hi)) throw ArgumentError("QP: box requires lo <= hi");
    }
  }

  SmallVec w(n);
  w.head(p) = q.weight_u;
  if (q.slack_present) w(p) = q.weight_slack;
  const SmallVec w_inv = w.cwiseInverse();

  thread_local std::vector<detail::NormalRow> rows;
  detail::normalize(q, rows);
  auto res = detail::enumerate_active_sets(w_inv, rows);

  QpSolution sol;
  if (!res.best) {
    sol.status = QpStatus::kInfeasible;
    sol.u = SmallVec::Zero(p);
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    sol.kkt_residual = std::numeric_limits<double>::infinity();
    if (q.rows.size() <= 4) {
      // Smallest infeasible subset of the rows (box always included).
      const int m = static_cast<int>(q.rows.size());
      bool found = false;
      for (int k = 1; k <= m && !found; ++k) {
        detail::for_each_subset(m, k, [&](const int* subset, int kk) {
          if (found || kk != k) return;
          QpProblem sub = q;
          sub.rows.clear();
          for (int i = 0; i < kk; ++i) sub.rows.push_back(q.rows[static_cast<std::size_t>(subset[i])]);
          std::vector<detail::NormalRow> sub_rows;
          detail::normalize(sub, sub_rows);
          if (!detail::enumerate_active_sets(w_inv, sub_rows).best) {
            found = true;
            for (const auto& r : sub.rows) sol.conflicting.push_back(r.label);
          }
        });
      }
    }
    return sol;
  }

  const auto& best = *res.best;
  const SmallVec& z = best.z;
  sol.u = z.head(p);
  if (q.slack_present) sol.slack = z(p);
  sol.objective = best.objective;

  // Full multiplier vector over all normalized rows.
  const int m = static_cast<int>(rows.size());
  std::vector<double> lam(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < res.k; ++i) lam[static_cast<std::size_t>(res.subset[i])] = best.lambda(i);

  SmallVec stationarity = w.cwiseProduct(z);
  double scale = 1.0 + stationarity.cwiseAbs().maxCoeff();
  double resid = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    const double li = lam[static_cast<std::size_t>(i)];
    stationarity -= li * r.a;
    const double gap = r.a.dot(z) - r.b;
    const double rs = detail::row_scale(r, z);
    resid = std::max(resid, std::max(0.0, -gap) / rs);           // primal
    resid = std::max(resid, std::max(0.0, -li) / scale);         // dual
    resid = std::max(resid, std::abs(li * gap) / (scale * rs));  // complementarity
    if (std::abs(gap) <= kQpFeasTol * rs) {
      sol.active_set.push_back(r.label);
      sol.multipliers.push_back(li);
    }
  }
  resid = std::max(resid, stationarity.cwiseAbs().maxCoeff() / scale);
  sol.kkt_residual = resid;
  sol.status = QpStatus::kOptimal;
  return sol;
}

/// Componentwise clamp onto the box.
inline SmallVec saturate(const SmallVec& u, const std::vector<Bounds1D>& box) {
  if (static_cast<int>(box.size()) != u.size()) throw ArgumentError("saturate: box size mismatch");
  SmallVec out = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto& b = box[static_cast<std::size_t>(i)];
    if (!(b.lo <= b.hi)) throw ArgumentError("saturate: box requires lo <= hi");
    out(i) = std::clamp(u(i), b.lo, b.hi);
  }
  return out;
}

}  // namespace ssk
