#include "advpred/gradients.hpp"

namespace advpred {
namespace {

Subgradient from_choice(AdversaryChoice choice, const FeatureMap& map, std::span<const double> x, Label y) {
  Subgradient g;
  g.vector = expected_feature_gap(map, x, y, choice.q);
  g.q_star = std::move(choice.q);
  g.loss = choice.value;
  return g;
}

}  // namespace

Vector expected_feature_gap(const FeatureMap& map, std::span<const double> x, Label y, std::span<const double> q) {
  if (q.size() != map.classes()) throw Error(ErrorCode::DimensionMismatch, "q length differs from class count");
  Vector out(map.output_dim(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] != 0.0) map.accumulate(x, static_cast<Label>(j + 1), q[j], out);
  map.accumulate(x, y, -1.0, out);
  return out;
}

Subgradient subgrad_general(const LossMatrix& loss, std::span<const double> x, Label y,
                            std::span<const double> theta, const FeatureMap& map) {
  const Vector f = map.potentials(theta, x);
  return from_choice(general_choice(f, y, loss), map, x, y);
}

Subgradient subgrad_zero_one(std::span<const double> x, Label y, std::span<const double> theta,
                             const FeatureMap& map) {
  const Vector f = map.potentials(theta, x);
  return from_choice(zero_one_choice(f, y), map, x, y);
}

Subgradient subgrad_ordinal_abs(std::span<const double> x, Label y, std::span<const double> theta,
                                const FeatureMap& map) {
  const Vector f = map.potentials(theta, x);
  return from_choice(ordinal_abs_choice(f, y), map, x, y);
}

Subgradient subgrad_abstain(std::span<const double> x, Label y, std::span<const double> theta,
                            const FeatureMap& map, double alpha) {
  const Vector f = map.potentials(theta, x);
  return from_choice(abstain_choice(f, y, alpha), map, x, y);
}

Subgradient subgradient(const LossSpec& spec, std::span<const double> x, Label y, std::span<const double> theta,
                        const FeatureMap& map) {
  const Vector f = map.potentials(theta, x);
  return from_choice(adversary_choice(spec, f, y), map, x, y);
}

}  // namespace advpred
