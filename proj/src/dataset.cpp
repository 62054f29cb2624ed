#include "advpred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace advpred {

void Dataset::check() const {
  if (x.rows() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  for (Label label : y)
    if (label < 1 || static_cast<std::size_t>(label) > classes)
      throw Error(ErrorCode::InvalidSpec, "label " + std::to_string(label) + " outside [1, k]");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidSpec, "non-finite feature value");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.classes = classes;
  out.name = name;
  out.x = Matrix(indices.size(), x.cols());
  out.y.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = x.row(indices[r]);
    std::copy(src.begin(), src.end(), out.x.row(r).begin());
    out.y.push_back(y[indices[r]]);
  }
  return out;
}

Scaler Scaler::fit(const Dataset& data, bool intercept) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit a scaler on no rows");
  const std::size_t m = data.features();
  const double n = static_cast<double>(data.size());
  Scaler s;
  s.intercept = intercept;
  s.mean.assign(m, 0.0);
  s.scale.assign(m, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) s.mean[j] += data.x(i, j) / n;
  Vector var(m, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double c = data.x(i, j) - s.mean[j];
      var[j] += c * c / n;
    }
  for (std::size_t j = 0; j < m; ++j) s.scale[j] = var[j] > 1e-24 ? 1.0 / std::sqrt(var[j]) : 0.0;
  return s;
}

Vector Scaler::transform(std::span<const double> x) const {
  if (x.size() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "scaler width differs from input");
  Vector out(output_dim(), 1.0);
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) * scale[j];
  return out;
}

Dataset Scaler::transform(const Dataset& data) const {
  Dataset out;
  out.y = data.y;
  out.classes = data.classes;
  out.name = data.name;
  out.x = Matrix(data.size(), output_dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector row = transform(data.row(i));
    std::copy(row.begin(), row.end(), out.x.row(i).begin());
  }
  return out;
}

std::uint64_t digest(const Dataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t dims[3] = {data.x.rows(), data.x.cols(), data.classes};
  mix(dims, sizeof dims);
  mix(data.x.data().data(), data.x.data().size() * sizeof(double));
  mix(data.y.data(), data.y.size() * sizeof(Label));
  return h;
}

}  // namespace advpred
