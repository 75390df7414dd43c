#ifndef LKA_RNG_HPP
#define LKA_RNG_HPP

#include <cstdint>
#include <vector>

namespace lka {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based splittable stream: every draw is a pure function of
// (seed, id0, id1, id2, counter), so replicates produce identical data
// regardless of thread layout or evaluation order across replicates.
class RngStream {
public:
  RngStream() : key_(0) {}
  RngStream(std::uint64_t seed, std::uint64_t id0, std::uint64_t id1 = 0,
            std::uint64_t id2 = 0) {
    key_ = mix64(seed + 0x9E3779B97F4A7C15ull);
    key_ = mix64(key_ ^ (id0 + 0xD1B54A32D192ED03ull));
    key_ = mix64(key_ ^ (id1 + 0x8CB92BA72F3D8DD7ull));
    key_ = mix64(key_ ^ (id2 + 0xEB44ACCAB455D165ull));
  }

  std::uint64_t next_u64() {
    return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull);
  }

  // uniform on [0,1), 53-bit resolution
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  long binomial(long n, double p) {
    long c = 0;
    for (long i = 0; i < n; ++i) c += bernoulli(p) ? 1 : 0;
    return c;
  }

  // index drawn from cumulative weights (cdf.back() == total mass)
  int from_cdf(const std::vector<double>& cdf) {
    const double u = uniform() * cdf.back();
    int lo = 0, hi = int(cdf.size()) - 1;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (cdf[mid] <= u) lo = mid + 1; else hi = mid;
    }
    return lo;
  }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace lka

#endif
