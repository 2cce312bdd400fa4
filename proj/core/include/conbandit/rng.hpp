#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace conbandit {

// Counter-based generator: draw n of a stream with key k is mix(k + (n+1)*golden).
// Streams derived through split() never overlap in practice and the output is
// identical on every platform, unlike the std distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)), counter_(0) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Independent child stream keyed on (this stream's key, tag). Does not
  // advance the parent.
  RngStream split(std::uint64_t tag) const { return RngStream(key_, mix(tag + kGolden), 0); }
  RngStream split(std::string_view tag) const { return split(hash(tag)); }

  std::uint64_t draws() const { return counter_; }

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x243f6a8885a308d3ULL;

  RngStream(std::uint64_t parent_key, std::uint64_t tag_mix, std::uint64_t counter)
      : key_(mix(parent_key ^ tag_mix)), counter_(counter) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // FNV-1a
  static constexpr std::uint64_t hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace conbandit
