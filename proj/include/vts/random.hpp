#pragma once

#include <cstdint>
#include <initializer_list>

namespace vts {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the i-th draw is a pure function of (key, i), so
/// streams can be split by tag and replayed independent of scheduling.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(splitmix64(key)) {}

  /// Derive a stream keyed by this key and the given tags.
  CounterStream fork(std::initializer_list<std::uint64_t> tags) const {
    std::uint64_t k = key_;
    for (auto t : tags) k = splitmix64(k ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
    CounterStream s(0);
    s.key_ = k;
    return s;
  }

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform on [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vts
