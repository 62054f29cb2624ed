#include "advpred/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace advpred {

FeatureMap::FeatureMap(FeatureKind kind, std::size_t input_dim, std::size_t classes)
    : kind_(kind), input_dim_(input_dim), classes_(classes) {
  if (classes_ < 1) throw Error(ErrorCode::InvalidSpec, "feature map needs at least one class");
}

std::size_t FeatureMap::output_dim() const noexcept {
  return kind_ == FeatureKind::Thresholded ? input_dim_ + classes_ - 1 : input_dim_ * classes_;
}

void FeatureMap::check(std::span<const double> x, Label y) const {
  if (x.size() != input_dim_)
    throw Error(ErrorCode::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " features, map expects " + std::to_string(input_dim_));
  if (y < 1 || static_cast<std::size_t>(y) > classes_)
    throw Error(ErrorCode::DimensionMismatch, "label " + std::to_string(y) + " outside the map's class range");
}

void FeatureMap::accumulate(std::span<const double> x, Label y, double scale, std::span<double> out) const {
  check(x, y);
  if (out.size() != output_dim()) throw Error(ErrorCode::DimensionMismatch, "output buffer has wrong length");
  if (kind_ == FeatureKind::Thresholded) {
    const double s = scale * static_cast<double>(y);
    for (std::size_t d = 0; d < input_dim_; ++d) out[d] += s * x[d];
    // I(y <= l) for l = 1..k-1
    for (std::size_t l = static_cast<std::size_t>(y); l < classes_; ++l) out[input_dim_ + l - 1] += scale;
  } else {
    const std::size_t offset = static_cast<std::size_t>(y - 1) * input_dim_;
    for (std::size_t d = 0; d < input_dim_; ++d) out[offset + d] += scale * x[d];
  }
}

Vector FeatureMap::operator()(std::span<const double> x, Label y) const {
  Vector out(output_dim(), 0.0);
  accumulate(x, y, 1.0, out);
  return out;
}

Vector FeatureMap::potentials(std::span<const double> theta, std::span<const double> x) const {
  if (theta.size() != output_dim()) throw Error(ErrorCode::DimensionMismatch, "parameter length mismatch");
  check(x, 1);
  Vector f(classes_, 0.0);
  if (kind_ == FeatureKind::Thresholded) {
    // f_i = i (w'x) + sum_{l >= i} eta_l, accumulated right to left.
    const double wx = dot(theta.first(input_dim_), x);
    double tail = 0.0;
    for (std::size_t i = classes_; i >= 1; --i) {
      if (i <= classes_ - 1) tail += theta[input_dim_ + i - 1];
      f[i - 1] = static_cast<double>(i) * wx + tail;
    }
  } else {
    for (std::size_t i = 0; i < classes_; ++i) f[i] = dot(theta.subspan(i * input_dim_, input_dim_), x);
  }
  return f;
}

double FeatureMap::inner(double xz, Label i, Label j) const {
  if (kind_ == FeatureKind::Thresholded) {
    // indicator overlap: l in [max(i, j), k - 1]
    const double overlap = static_cast<double>(classes_) - static_cast<double>(std::max(i, j));
    return static_cast<double>(i) * static_cast<double>(j) * xz + overlap;
  }
  return i == j ? xz : 0.0;
}

double FeatureMap::squared_distance(double xx, double zz, double xz, Label i, Label j) const {
  if (kind_ == FeatureKind::Thresholded) {
    const double a = static_cast<double>(i);
    const double b = static_cast<double>(j);
    return a * a * xx - 2.0 * a * b * xz + b * b * zz + static_cast<double>(std::abs(i - j));
  }
  return i == j ? xx - 2.0 * xz + zz : xx + zz;
}

Vector featurize(const FeatureMap& map, std::span<const double> x, Label y) { return map(x, y); }

void validate(const KernelSpec& spec) {
  if (const auto* g = std::get_if<GaussianKernel>(&spec); g && !(g->gamma > 0.0))
    throw Error(ErrorCode::InvalidSpec, "gaussian kernel needs gamma > 0");
}

double kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in length");
  if (const auto* g = std::get_if<GaussianKernel>(&spec)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
    return std::exp(-g->gamma * d2);
  }
  return dot(u, v);
}

double kernel(const KernelSpec& spec, const FeatureMap& map, double xx, double zz, double xz, Label i, Label j) {
  if (const auto* g = std::get_if<GaussianKernel>(&spec))
    return std::exp(-g->gamma * std::max(0.0, map.squared_distance(xx, zz, xz, i, j)));
  return map.inner(xz, i, j);
}

}  // namespace advpred
