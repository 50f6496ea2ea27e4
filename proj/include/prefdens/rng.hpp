#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace prefdens {

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a(std::string_view text);

// Seed for a named stream. Streams are keyed by name, so adding a new
// component never shifts the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

// All sampling goes through this wrapper so that results depend only on
// the mt19937_64 bit stream, not on a standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master, std::string_view name) {
    return Rng(derive_seed(master, name));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). Rejection sampling keeps it unbiased.
  std::size_t below(std::size_t n);

  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace prefdens
