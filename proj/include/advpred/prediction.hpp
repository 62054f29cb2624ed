#pragma once

#include <span>
#include <variant>

#include "advpred/common.hpp"
#include "advpred/loss.hpp"
#include "advpred/training.hpp"

namespace advpred {

using Model = std::variant<LinearModel, KernelModel>;

const LossSpec& loss_spec(const Model& model);
const FeatureMap& feature_map(const Model& model);
Vector potentials(const Model& model, std::span<const double> x);

struct Prediction {
  // 1-based predictor option. For abstain specs option k + 1 is "abstain".
  Label label = 1;
  bool abstained = false;
  Vector distribution;  // empty unless the scheme produces one
};

// Prediction schemes on a bare potential vector.
Prediction argmax_prediction(std::span<const double> f);
Prediction probabilistic_prediction(const LossMatrix& loss, std::span<const double> f, bool last_option_abstains);
Prediction abstain_prediction(std::span<const double> f, double alpha);

Prediction predict_argmax(const Model& model, std::span<const double> x);
Prediction predict_probabilistic(const Model& model, std::span<const double> x);
Prediction predict_abstain(const Model& model, std::span<const double> x, double alpha);

// argmax for square natural losses, the abstain rule for abstain specs, the
// predictor game otherwise.
Prediction predict_default(const Model& model, std::span<const double> x);

}  // namespace advpred
