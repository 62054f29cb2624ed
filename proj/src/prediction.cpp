#include "advpred/prediction.hpp"

#include "advpred/game.hpp"

namespace advpred {

const LossSpec& loss_spec(const Model& model) {
  return std::visit([](const auto& m) -> const LossSpec& { return m.spec; }, model);
}

const FeatureMap& feature_map(const Model& model) {
  return std::visit([](const auto& m) -> const FeatureMap& { return m.map; }, model);
}

Vector potentials(const Model& model, std::span<const double> x) {
  return std::visit([x](const auto& m) { return m.potentials(x); }, model);
}

Prediction argmax_prediction(std::span<const double> f) {
  if (f.empty()) throw Error(ErrorCode::DimensionMismatch, "empty potential vector");
  Prediction p;
  p.label = static_cast<Label>(argmax(f) + 1);
  return p;
}

Prediction probabilistic_prediction(const LossMatrix& loss, std::span<const double> f, bool last_option_abstains) {
  GameSolution s = solve_predictor_game(loss, f);
  Prediction p;
  p.label = static_cast<Label>(argmax(s.p) + 1);
  p.abstained = last_option_abstains && static_cast<std::size_t>(p.label) == loss.options();
  p.distribution = std::move(s.p);
  return p;
}

Prediction abstain_prediction(std::span<const double> f, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) throw Error(ErrorCode::AlphaOutOfRange, "abstain penalty must lie in [0, 1/2]");
  const std::size_t k = f.size();
  if (k < 2) throw Error(ErrorCode::DimensionMismatch, "abstention needs at least two classes");

  std::size_t first = 0;
  std::size_t second = 1;
  if (f[1] > f[0]) std::swap(first, second);
  for (std::size_t i = 2; i < k; ++i) {
    if (f[i] > f[first]) {
      second = first;
      first = i;
    } else if (f[i] > f[second]) {
      second = i;
    }
  }

  const double gap = f[first] - f[second];
  Prediction p;
  p.distribution.assign(k + 1, 0.0);
  if (gap >= 1.0) {
    p.distribution[first] = 1.0;
  } else {
    p.distribution[first] = gap;
    p.distribution[k] = 1.0 - gap;
  }
  if (gap >= 0.5) {
    p.label = static_cast<Label>(first + 1);
  } else {
    p.label = static_cast<Label>(k + 1);
    p.abstained = true;
  }
  return p;
}

Prediction predict_argmax(const Model& model, std::span<const double> x) {
  if (has_abstain_option(loss_spec(model)))
    throw Error(ErrorCode::SchemeUnavailable, "potential argmax cannot produce the abstain option");
  return argmax_prediction(potentials(model, x));
}

Prediction predict_probabilistic(const Model& model, std::span<const double> x) {
  const LossSpec& spec = loss_spec(model);
  const LossMatrix loss = build_loss_matrix(spec, feature_map(model).classes());
  return probabilistic_prediction(loss, potentials(model, x), has_abstain_option(spec));
}

Prediction predict_abstain(const Model& model, std::span<const double> x, double alpha) {
  return abstain_prediction(potentials(model, x), alpha);
}

Prediction predict_default(const Model& model, std::span<const double> x) {
  const LossSpec& spec = loss_spec(model);
  if (const auto* a = std::get_if<Abstain>(&spec)) return predict_abstain(model, x, a->alpha);
  if (const auto* g = std::get_if<General>(&spec); g && g->matrix.options() != g->matrix.classes())
    return predict_probabilistic(model, x);
  return predict_argmax(model, x);
}

}  // namespace advpred
