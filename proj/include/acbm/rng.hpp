#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace acbm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 seeded through splitmix64 so that consecutive seeds and distinct
// stream ids give unrelated engines. Only raw 64-bit draws are used so that
// output is identical across standard library implementations.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound).
  std::size_t below(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound));
  }

  // Index drawn proportionally to the given (unnormalized) probabilities.
  std::size_t categorical(std::span<const double> probs);

  // Index drawn proportionally to exp(log_weights). -inf entries are never
  // selected; at least one entry must be finite.
  std::size_t log_categorical(std::span<const double> log_weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace acbm
