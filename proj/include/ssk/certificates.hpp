#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssk/errors.hpp"
#include "ssk/generator.hpp"
#include "ssk/linalg.hpp"

namespace ssk {

/// Class-K comparison functions, odd-extended to negative arguments.
class ClassKFunction {
 public:
  enum class Kind { kLinear, kPower, kCubic };

  static ClassKFunction linear(double k) { return ClassKFunction(Kind::kLinear, k, 1.0); }
  static ClassKFunction power(double k, double exponent) {
    return ClassKFunction(Kind::kPower, k, exponent);
  }
  static ClassKFunction cubic(double k) { return ClassKFunction(Kind::kCubic, k, 3.0); }

  double operator()(double s) const {
    switch (kind_) {
      case Kind::kLinear:
        return gain_ * s;
      case Kind::kCubic:
        return gain_ * s * s * s;
      case Kind::kPower:
        return std::copysign(gain_ * std::pow(std::abs(s), exponent_), s);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  double gain() const { return gain_; }
  double exponent() const { return exponent_; }

 private:
  ClassKFunction(Kind kind, double gain, double exponent)
      : kind_(kind), gain_(gain), exponent_(exponent) {
    if (!(gain > 0.0) || !std::isfinite(gain) || !(exponent > 0.0) || !std::isfinite(exponent)) {
      throw ArgumentError("ClassKFunction: parameters must be positive and finite");
    }
  }

  Kind kind_;
  double gain_;
  double exponent_;
};

enum class Sense { kLessEqual, kGreaterEqual };

struct RowLabel {
  std::string_view name;  // static storage only
  int level = 0;

  std::string str() const { return std::string(name) + "[" + std::to_string(level) + "]"; }
  friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

/// One affine row  control_coeffs . u + slack_coeff * delta  {<=, >=}  rhs.
struct AffineConstraint {
  SmallVec control_coeffs;
  double slack_coeff = 0.0;
  double rhs = 0.0;
  Sense sense = Sense::kGreaterEqual;
  RowLabel label;

  double lhs(const SmallVec& u, double slack = 0.0) const {
    return control_coeffs.dot(u) + slack_coeff * slack;
  }
  bool satisfied(const SmallVec& u, double slack = 0.0, double tol = 0.0) const {
    const double v = lhs(u, slack);
    return sense == Sense::kGreaterEqual ? v >= rhs - tol : v <= rhs + tol;
  }
  bool has_decision_dependence() const {
    return slack_coeff != 0.0 || (control_coeffs.array() != 0.0).any();
  }
};

/// Rows with no decision dependence are decided on the spot: feasible rows are
/// dropped, infeasible rows raise.
inline std::optional<AffineConstraint> resolve_trivial(AffineConstraint row) {
  if (!row.control_coeffs.allFinite() || !std::isfinite(row.slack_coeff) || !std::isfinite(row.rhs)) {
    throw ArgumentError("constraint " + row.label.str() + " has non-finite coefficients");
  }
  if (row.has_decision_dependence()) return row;
  const bool ok = row.sense == Sense::kGreaterEqual ? 0.0 >= row.rhs : 0.0 <= row.rhs;
  if (!ok) {
    throw InfeasibleConstraintError("constraint " + row.label.str() +
                                    " has no control authority and is violated (rhs=" +
                                    std::to_string(row.rhs) + ")");
  }
  return std::nullopt;
}

enum class CertificateFamily { kSRCBF, kSZCBF, kSCBF, kHO_SCBF, kHO_SZCBF };

inline std::string_view family_name(CertificateFamily f) {
  switch (f) {
    case CertificateFamily::kSRCBF: return "SRCBF";
    case CertificateFamily::kSZCBF: return "SZCBF";
    case CertificateFamily::kSCBF: return "SCBF";
    case CertificateFamily::kHO_SCBF: return "HO_SCBF";
    case CertificateFamily::kHO_SZCBF: return "HO_SZCBF";
  }
  return "?";
}

inline std::optional<CertificateFamily> parse_family(std::string_view s) {
  for (auto f : {CertificateFamily::kSRCBF, CertificateFamily::kSZCBF, CertificateFamily::kSCBF,
                 CertificateFamily::kHO_SCBF, CertificateFamily::kHO_SZCBF}) {
    if (family_name(f) == s) return f;
  }
  return std::nullopt;
}

template <int N>
struct CertificateSpec {
  CertificateFamily family = CertificateFamily::kSCBF;
  SmoothFunction<N> h;
  std::optional<BarrierChain<N>> chain;
  std::vector<ClassKFunction> alphas;
  double gamma = 1.0;
  bool ho_szcbf_uses_h1 = false;

  void validate() const {
    std::size_t need = 0;
    switch (family) {
      case CertificateFamily::kSRCBF:
      case CertificateFamily::kSZCBF: need = 1; break;
      case CertificateFamily::kSCBF:
      case CertificateFamily::kHO_SCBF: need = 0; break;
      case CertificateFamily::kHO_SZCBF: need = 2; break;
    }
    if (alphas.size() != need) {
      throw ArgumentError(std::string(family_name(family)) + " expects " + std::to_string(need) +
                          " class-K functions, got " + std::to_string(alphas.size()));
    }
    if (family == CertificateFamily::kSRCBF && !(gamma > 0.0)) {
      throw ArgumentError("SRCBF gamma must be positive");
    }
    if ((family == CertificateFamily::kHO_SCBF || family == CertificateFamily::kHO_SZCBF) && !chain) {
      throw ArgumentError(std::string(family_name(family)) + " needs a barrier chain");
    }
    if (family == CertificateFamily::kHO_SZCBF) {
      if (chain->relative_degree != 2) throw ArgumentError("HO_SZCBF is built for relative degree 2");
      for (const auto& a : alphas) {
        if (a.kind() != ClassKFunction::Kind::kLinear) {
          throw ArgumentError("HO_SZCBF requires linear class-K functions");
        }
      }
    }
  }
};

/// B = 1/h with derivatives by the quotient rule; defined where h != 0.
template <int N>
SmoothFunction<N> reciprocal(const SmoothFunction<N>& h) {
  return {[h](const Vec<N>& x) { return 1.0 / h.value(x); },
          [h](const Vec<N>& x) {
            const double v = h.value(x);
            return (-h.gradient(x) / (v * v)).eval();
          },
          [h](const Vec<N>& x) {
            const double v = h.value(x);
            const Vec<N> g = h.gradient(x);
            return (2.0 * g * g.transpose() / (v * v * v) - h.hessian(x) / (v * v)).eval();
          }};
}

namespace detail {

template <int P>
AffineConstraint make_row(const Vec<P>& coeffs, double rhs, Sense sense, RowLabel label) {
  AffineConstraint row;
  row.control_coeffs = coeffs;
  row.rhs = rhs;
  row.sense = sense;
  row.label = label;
  return row;
}

}  // namespace detail

/// A B(x) <= alpha(h(x)) with B = 1/h; alpha defaults to gamma * h.
template <int N, int P, int D>
std::optional<AffineConstraint> srcbf_row(const SdeModel<N, P, D>& model,
                                          const CertificateSpec<N>& spec, const Vec<N>& x) {
  const double hx = spec.h.value(x);
  if (!(hx > 0.0)) {
    throw BoundaryError("SRCBF undefined at h(x)=" + std::to_string(hx) + " (outside the interior)");
  }
  const auto dec = decompose(model, reciprocal(spec.h), x);
  const double bound = spec.alphas.empty() ? spec.gamma * hx : spec.alphas.front()(hx);
  return resolve_trivial(detail::make_row<P>(dec.control_part, bound - dec.drift_part,
                                             Sense::kLessEqual, {"SRCBF", 0}));
}

/// A h(x) + alpha(h(x)) >= 0.
template <int N, int P, int D>
std::optional<AffineConstraint> szcbf_row(const SdeModel<N, P, D>& model,
                                          const CertificateSpec<N>& spec, const Vec<N>& x) {
  const auto dec = decompose(model, spec.h, x);
  const double shift = spec.alphas.empty() ? 0.0 : spec.alphas.front()(spec.h.value(x));
  return resolve_trivial(detail::make_row<P>(dec.control_part, -dec.drift_part - shift,
                                             Sense::kGreaterEqual, {"SZCBF", 0}));
}

/// A h(x) >= 0.
template <int N, int P, int D>
std::optional<AffineConstraint> scbf_row(const SdeModel<N, P, D>& model,
                                         const CertificateSpec<N>& spec, const Vec<N>& x) {
  const auto dec = decompose(model, spec.h, x);
  return resolve_trivial(
      detail::make_row<P>(dec.control_part, -dec.drift_part, Sense::kGreaterEqual, {"SCBF", 0}));
}

/// A b_{r-1}(x) >= 0 for the top chain level. Raises DegenerateConstraintError
/// where the control coefficient vanishes (<= 1e-9).
template <int N, int P, int D>
AffineConstraint ho_scbf_row(const SdeModel<N, P, D>& model, const BarrierChain<N>& chain,
                             const Vec<N>& x) {
  const int top = chain.relative_degree - 1;
  const auto dec = decompose(model, chain.top(), x);
  if (dec.control_part.norm() <= kVanishingControlTol) {
    throw DegenerateConstraintError("HO_SCBF row at level " + std::to_string(top) +
                                    " has no control authority at this state");
  }
  const std::string_view name = chain.relative_degree == 1 ? "SCBF" : "HO_SCBF";
  return detail::make_row<P>(dec.control_part, -dec.drift_part, Sense::kGreaterEqual, {name, top});
}

/// Second-order zeroing construction
///   h1 = A h + a1 h,   h2 = A h1 + a2 h   (or a2 h1 when `uses_h1`),   h2 >= 0,
/// with A h taken from the chain's b_1 (the control part of A h vanishes).
template <int N, int P, int D>
AffineConstraint ho_szcbf_row(const SdeModel<N, P, D>& model, const BarrierChain<N>& chain,
                              const ClassKFunction& alpha1, const ClassKFunction& alpha2,
                              const Vec<N>& x, bool uses_h1 = false) {
  if (chain.relative_degree != 2) throw ArgumentError("ho_szcbf_row: chain must have relative degree 2");
  if (alpha1.kind() != ClassKFunction::Kind::kLinear || alpha2.kind() != ClassKFunction::Kind::kLinear) {
    throw ArgumentError("ho_szcbf_row: class-K functions must be linear");
  }
  const auto& h = chain.levels[0];
  const auto& b1 = chain.levels[1];
  const double hx = h.value(x);
  // d/dx (b1 + k1 h) split by linearity of the generator.
  const auto dec_b1 = decompose(model, b1, x);
  const auto dec_h = decompose(model, h, x);
  const double k1 = alpha1.gain();
  const double drift = dec_b1.drift_part + k1 * dec_h.drift_part;
  const Vec<P> control = dec_b1.control_part + k1 * dec_h.control_part;
  if (control.norm() <= kVanishingControlTol) {
    throw DegenerateConstraintError("HO_SZCBF row has no control authority at this state");
  }
  const double h1 = b1.value(x) + alpha1(hx);
  const double shift = uses_h1 ? alpha2(h1) : alpha2(hx);
  return detail::make_row<P>(control, -drift - shift, Sense::kGreaterEqual, {"HO_SZCBF", 1});
}

/// A V(x) <= delta over the decision vector (u, delta).
template <int N, int P, int D>
AffineConstraint clf_row(const SdeModel<N, P, D>& model, const SmoothFunction<N>& V,
                         const Vec<N>& x) {
  const auto dec = decompose(model, V, x);
  AffineConstraint row = detail::make_row<P>(dec.control_part, -dec.drift_part, Sense::kLessEqual,
                                             {"CLF", 0});
  row.slack_coeff = -1.0;
  return row;
}

}  // namespace ssk
