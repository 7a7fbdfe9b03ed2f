#include "scorecheck/rng.hpp"

#include <cmath>
#include <vector>

namespace scorecheck {

namespace {

std::vector<std::uint32_t> seed_words(std::uint64_t master_seed,
                                      std::initializer_list<std::uint64_t> stream_path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream_path.size() + 2));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  // Path length is mixed in so that {a} and {a, 0} differ.
  push(stream_path.size());
  for (auto id : stream_path) push(id);
  return words;
}

}  // namespace

Rng::Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream_path) {
  auto words = seed_words(master_seed, stream_path);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    double u = static_cast<double>(engine_() >> 11) * scale;
    if (u > 0.0) return u;
  }
}

double Rng::normal(double mean, double variance) {
  return mean + std::sqrt(variance) * standard_normal();
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream_path) {
  auto words = seed_words(master_seed, stream_path);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace scorecheck
