#pragma once

#include <span>

#include "advpred/common.hpp"
#include "advpred/features.hpp"
#include "advpred/loss.hpp"

namespace advpred {

/// One element of the subdifferential of AL(x, y, theta) with respect to theta:
/// sum_j q*_j phi(x, j) - phi(x, y) for the adversary distribution q* that
/// realizes it.
struct Subgradient {
  Vector vector;
  Vector q_star;
  double loss = 0.0;  // AL at the evaluation point
};

// sum_j q_j phi(x, j) - phi(x, y)
Vector expected_feature_gap(const FeatureMap& map, std::span<const double> x, Label y, std::span<const double> q);

Subgradient subgrad_general(const LossMatrix& loss, std::span<const double> x, Label y,
                            std::span<const double> theta, const FeatureMap& map);
Subgradient subgrad_zero_one(std::span<const double> x, Label y, std::span<const double> theta,
                             const FeatureMap& map);
Subgradient subgrad_ordinal_abs(std::span<const double> x, Label y, std::span<const double> theta,
                                const FeatureMap& map);
Subgradient subgrad_abstain(std::span<const double> x, Label y, std::span<const double> theta,
                            const FeatureMap& map, double alpha);

// Closed form where one exists (including ordinal-sq and weighted), LP otherwise.
Subgradient subgradient(const LossSpec& spec, std::span<const double> x, Label y, std::span<const double> theta,
                        const FeatureMap& map);

}  // namespace advpred
