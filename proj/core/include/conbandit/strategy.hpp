#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conbandit/rng.hpp"

namespace conbandit {

inline constexpr double kSimplexTolerance = 1e-9;

struct ArmIndex {
  std::size_t value = 0;

  friend bool operator==(ArmIndex, ArmIndex) = default;
  friend auto operator<=>(ArmIndex, ArmIndex) = default;
};

// A probability vector over K arms. Construction validates non-negativity and
// that the entries sum to one within kSimplexTolerance.
class Strategy {
 public:
  explicit Strategy(std::vector<double> probs);

  static Strategy uniform(std::size_t arms);
  static Strategy point_mass(std::size_t arms, ArmIndex arm);

  // Clamps negatives to zero and rescales; for absorbing drift after
  // projections. Throws if the total mass is not positive.
  static Strategy normalized(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t a) const { return probs_[a]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& values() const { return probs_; }

  double dot(std::span<const double> v) const;

  friend bool operator==(const Strategy&, const Strategy&) = default;

 private:
  struct Unchecked {};
  Strategy(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

// Draws a ~ x with a single uniform draw. Cumulative-sum boundary hits go to
// the lower arm; zero-probability arms are never returned.
ArmIndex sample_arm(const Strategy& x, RngStream& rng);

// Same as above for a raw probability vector; validates it first.
ArmIndex sample_arm(std::span<const double> probs, RngStream& rng);

}  // namespace conbandit
