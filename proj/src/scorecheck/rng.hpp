#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace scorecheck {

/// Stream tags used when deriving independent generators from a master seed.
/// Each consumer in the pipeline owns one tag so that streams never collide.
namespace stream {
inline constexpr std::uint64_t simulate = 0x53494d;      // "SIM"
inline constexpr std::uint64_t parent_chain = 0x504152;  // "PAR"
inline constexpr std::uint64_t child_draw = 0x434844;    // "CHD"
inline constexpr std::uint64_t nodesplit_rep = 0x4e5352;
inline constexpr std::uint64_t nodesplit_lik = 0x4e534c;
inline constexpr std::uint64_t hcct_null = 0x48434e;
}  // namespace stream

/// Deterministic random source for one stream.
///
/// A stream is identified by a master seed plus a path of stream ids; both are
/// fed through `std::seed_seq`, so distinct paths give statistically
/// independent Mersenne-Twister states and the same path always reproduces the
/// same sequence. Not thread-safe: each thread owns its own `Rng`.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream_path = {});

  engine_type& engine() noexcept { return engine_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal() { return normal_(engine_); }
  double normal(double mean, double variance);
  /// Gamma with unit scale.
  double gamma(double shape);

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derive a 64-bit seed for a child stream (used where an API takes a plain
/// seed rather than an `Rng`).
std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream_path);

}  // namespace scorecheck
