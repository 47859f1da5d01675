#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace fct {

// Seedable portable generator.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
// standard. Every distribution is implemented here rather than taken from
// <random>, because the standard distributions are implementation-defined:
//   uniform()  : top 53 bits of one draw scaled by 2^-53, in [0, 1)
//   below(n)   : rejection sampling on the top bits, unbiased
//   normal()   : Box-Muller on two uniforms, second variate cached
//   gamma(k)   : Marsaglia-Tsang squeeze; k < 1 via gamma(k+1) * U^(1/k)
//   beta(a, b) : X / (X + Y) with X ~ gamma(a), Y ~ gamma(b)
//   shuffle    : Fisher-Yates from the back using below()
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();
  double gamma(double shape);
  double beta(double a, double b);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stage seed from a master seed and a stage tag.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace fct
