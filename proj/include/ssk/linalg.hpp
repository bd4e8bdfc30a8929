#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ssk/errors.hpp"

namespace ssk {

template <int R>
using Vec = Eigen::Matrix<double, R, 1>;

template <int R, int C>
using Mat = Eigen::Matrix<double, R, C>;

/// Upper bound on QP decision variables (controls plus slack).
inline constexpr int kMaxDecisionVars = 8;

/// Heap-free dynamic vector used for QP rows and solutions.
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDecisionVars, 1>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
std::vector<double> to_std(const Eigen::MatrixBase<Derived>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

template <int N>
Vec<N> from_std(const std::vector<double>& values, const char* what) {
  if (values.size() != static_cast<std::size_t>(N)) {
    throw ArgumentError(std::string(what) + ": expected " + std::to_string(N) + " entries, got " +
                        std::to_string(values.size()));
  }
  Vec<N> v;
  for (int i = 0; i < N; ++i) v(i) = values[static_cast<std::size_t>(i)];
  return v;
}

/// Axis-aligned box in state space.
template <int N>
struct Box {
  Vec<N> lo;
  Vec<N> hi;

  bool valid() const {
    return all_finite(lo) && all_finite(hi) && (lo.array() <= hi.array()).all();
  }
  bool contains(const Vec<N>& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  std::string describe() const {
    std::string s = "[";
    for (int i = 0; i < N; ++i) {
      if (i) s += " x ";
      s += "[" + std::to_string(lo(i)) + ", " + std::to_string(hi(i)) + "]";
    }
    return s + "]";
  }
};

/// Radical-inverse (Halton) point set over a box; deterministic probe states.
template <int N>
std::vector<Vec<N>> halton_points(const Box<N>& box, int count) {
  static constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  static_assert(N <= 12, "halton_points supports up to 12 dimensions");
  std::vector<Vec<N>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    Vec<N> p;
    for (int d = 0; d < N; ++d) {
      const int base = kPrimes[static_cast<std::size_t>(d)];
      double f = 1.0, r = 0.0;
      for (int i = k; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
      }
      p(d) = box.lo(d) + r * (box.hi(d) - box.lo(d));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace ssk
