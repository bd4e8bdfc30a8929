#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

#include "ssk/errors.hpp"
#include "ssk/linalg.hpp"

namespace ssk {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block single_round(const Block& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Per-trajectory Gaussian substream. The increment block for step `counter`
/// depends only on (seed, stream_id, counter).
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint32_t stream_id = 0;
  std::uint64_t counter = 0;

  void advance() noexcept { ++counter; }
};

/// Normal draws per step are limited by the block layout (2 per Philox block).
inline constexpr int kMaxNoiseDim = 64;

namespace detail {

inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
  // 53 random bits mapped onto (0, 1].
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((1ull << 53) - 1)) + 1.0) * 0x1.0p-53;
}

/// Fills `out[0..d)` with standard normals for the given stream position.
template <typename Out>
void standard_normals(const NoiseStream& s, int d, std::uint32_t domain, Out&& out) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(s.seed),
                            static_cast<std::uint32_t>(s.seed >> 32) ^ domain};
  for (int block = 0; 2 * block < d; ++block) {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(block),
                                static_cast<std::uint32_t>(s.counter),
                                static_cast<std::uint32_t>(s.counter >> 32), s.stream_id};
    const auto r = Philox4x32::generate(ctr, key);
    const double u1 = to_unit_open_closed(r[0], r[1]);
    const double u2 = to_unit_open_closed(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out(2 * block, radius * std::cos(angle));
    if (2 * block + 1 < d) out(2 * block + 1, radius * std::sin(angle));
  }
}

/// Uniform draws in (0, 1] on an independent domain of the same key.
template <typename Out>
void uniforms(const NoiseStream& s, int count, std::uint32_t domain, Out&& out) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(s.seed),
                            static_cast<std::uint32_t>(s.seed >> 32) ^ domain};
  for (int block = 0; 2 * block < count; ++block) {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(block),
                                static_cast<std::uint32_t>(s.counter),
                                static_cast<std::uint32_t>(s.counter >> 32), s.stream_id};
    const auto r = Philox4x32::generate(ctr, key);
    out(2 * block, to_unit_open_closed(r[0], r[1]));
    if (2 * block + 1 < count) out(2 * block + 1, to_unit_open_closed(r[2], r[3]));
  }
}

inline constexpr std::uint32_t kBrownianDomain = 0u;
inline constexpr std::uint32_t kSamplingDomain = 0x5A5A5A5Au;

}  // namespace detail

/// Brownian increment block at the stream's current counter: d draws from Normal(0, dt).
inline Eigen::VectorXd gaussian_increments(const NoiseStream& stream, int d, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("gaussian_increments: dt must be positive");
  if (d < 1 || d > kMaxNoiseDim) throw ArgumentError("gaussian_increments: unsupported noise dimension");
  Eigen::VectorXd dw(d);
  const double scale = std::sqrt(dt);
  detail::standard_normals(stream, d, detail::kBrownianDomain,
                           [&](int i, double z) { dw(i) = scale * z; });
  return dw;
}

/// Fixed-size variant that also advances the counter.
template <int D>
Vec<D> next_increment(NoiseStream& stream, double dt) {
  static_assert(D >= 1 && D <= kMaxNoiseDim);
  if (!(dt > 0.0)) throw ArgumentError("gaussian_increments: dt must be positive");
  Vec<D> dw;
  const double scale = std::sqrt(dt);
  detail::standard_normals(stream, D, detail::kBrownianDomain,
                           [&](int i, double z) { dw(i) = scale * z; });
  stream.advance();
  return dw;
}

}  // namespace ssk
