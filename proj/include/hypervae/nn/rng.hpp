#pragma once

#include "hypervae/nn/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace hypervae::nn {

/// Explicit, copyable random state. Two Rng values that compare equal
/// produce identical draw sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Derives an independent generator; advances this one by a single draw.
  Rng fork() { return Rng(engine_()); }

  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// i.i.d. N(0, 1) draws, filled row by row.
Matrix sample_standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace hypervae::nn
