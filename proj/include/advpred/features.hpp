#pragma once

#include <cstddef>
#include <span>
#include <variant>

#include "advpred/common.hpp"

namespace advpred {

enum class FeatureKind {
  // phi(x, y) = [y x; I(y <= 1); ...; I(y <= k-1)], length m + k - 1
  Thresholded,
  // phi(x, y) = x placed in block y of k blocks, length m k
  Multiclass,
};

class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(FeatureKind kind, std::size_t input_dim, std::size_t classes);

  static FeatureMap thresholded(std::size_t m, std::size_t k) { return {FeatureKind::Thresholded, m, k}; }
  static FeatureMap multiclass(std::size_t m, std::size_t k) { return {FeatureKind::Multiclass, m, k}; }

  FeatureKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t output_dim() const noexcept;

  Vector operator()(std::span<const double> x, Label y) const;

  // out += scale * phi(x, y), without materializing phi.
  void accumulate(std::span<const double> x, Label y, double scale, std::span<double> out) const;

  // f_i = theta' phi(x, i) for every class; O(m k) for either layout.
  Vector potentials(std::span<const double> theta, std::span<const double> x) const;

  // phi(x, i)' phi(z, j) given only x'z.
  double inner(double xz, Label i, Label j) const;

  // ||phi(x, i) - phi(z, j)||^2 given x'x, z'z and x'z.
  double squared_distance(double xx, double zz, double xz, Label i, Label j) const;

  bool operator==(const FeatureMap&) const = default;

 private:
  void check(std::span<const double> x, Label y) const;

  FeatureKind kind_ = FeatureKind::Multiclass;
  std::size_t input_dim_ = 0;
  std::size_t classes_ = 0;
};

Vector featurize(const FeatureMap& map, std::span<const double> x, Label y);

struct LinearKernel {
  bool operator==(const LinearKernel&) const = default;
};
struct GaussianKernel {
  double gamma = 1.0;
  bool operator==(const GaussianKernel&) const = default;
};
using KernelSpec = std::variant<LinearKernel, GaussianKernel>;

void validate(const KernelSpec& spec);

double kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

// The same kernel evaluated on phi(x, i), phi(z, j) from the raw-input dot
// products only.
double kernel(const KernelSpec& spec, const FeatureMap& map, double xx, double zz, double xz, Label i, Label j);

}  // namespace advpred
