#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advpred/common.hpp"

namespace advpred {

struct Dataset {
  Matrix x;                 // n x m
  std::vector<Label> y;     // labels in [1, k]
  std::size_t classes = 0;  // k
  std::string name;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t features() const noexcept { return x.cols(); }
  std::span<const double> row(std::size_t i) const { return x.row(i); }

  // Throws DimensionMismatch / InvalidSpec when shapes or labels are inconsistent.
  void check() const;

  Dataset subset(std::span<const std::size_t> indices) const;
};

// Per-feature z-scoring. Zero-variance features have scale 0 and map to 0.
// With `intercept` a constant 1 is appended after scaling.
struct Scaler {
  Vector mean;
  Vector scale;  // 1 / std, or 0 for constant features
  bool intercept = false;

  static Scaler fit(const Dataset& data, bool intercept = false);
  std::size_t output_dim() const noexcept { return mean.size() + (intercept ? 1 : 0); }
  Vector transform(std::span<const double> x) const;
  Dataset transform(const Dataset& data) const;
  bool operator==(const Scaler&) const = default;
};

// FNV-1a over the raw bytes of features, labels and class count.
std::uint64_t digest(const Dataset& data);

}  // namespace advpred
