#include "advpred/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "advpred/gradients.hpp"

namespace advpred {
namespace {

void check_training_inputs(const Dataset& data, const FeatureMap& map) {
  data.check();
  if (data.size() == 0) throw Error(ErrorCode::EmptyDataset, "no training examples");
  if (map.input_dim() != data.features() || map.classes() != data.classes)
    throw Error(ErrorCode::DimensionMismatch, "feature map does not match the dataset shape");
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

}  // namespace

double regularized_risk(const LinearModel& model, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector f = model.potentials(data.row(i));
    total += adversarial_loss(model.spec, f, data.y[i]);
  }
  const double mean = data.size() == 0 ? 0.0 : total / static_cast<double>(data.size());
  return mean + 0.5 * model.lambda * squared_norm(model.theta);
}

LinearFit train_linear(const Dataset& data, const LossSpec& spec, const FeatureMap& map, double lambda,
                       const OptimizerConfig& config) {
  check_training_inputs(data, map);
  validate(spec);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::BadConfig, "lambda must be non-negative");
  if (config.epochs == 0) throw Error(ErrorCode::BadConfig, "epochs must be positive");
  std::visit(
      [&](const auto& rule) {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, SgdRule>) {
          if (!(rule.eta0 > 0.0) || rule.decay < 0.0) throw Error(ErrorCode::BadConfig, "bad SGD step size");
        } else if constexpr (std::is_same_v<R, AdaGradRule>) {
          if (!(rule.eta0 > 0.0)) throw Error(ErrorCode::BadConfig, "bad AdaGrad step size");
        } else {
          if (!(lambda > 0.0)) throw Error(ErrorCode::BadConfig, "the 1/(lambda t) schedule needs lambda > 0");
        }
      },
      config.rule);

  const std::size_t dim = map.output_dim();
  LinearModel model{Vector(dim, 0.0), map, spec, lambda};
  if (config.initial_theta) {
    if (config.initial_theta->size() != dim) throw Error(ErrorCode::DimensionMismatch, "initial theta length");
    model.theta = *config.initial_theta;
  }

  LinearFit fit;
  fit.model = model;
  double best = regularized_risk(model, data);
  fit.objective_trace.push_back(best);
  fit.best_trace.push_back(best);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Vector accum(dim, 0.0);    // AdaGrad squared-gradient sums
  Vector average = model.theta;
  std::size_t step = 0;
  const bool pegasos = std::holds_alternative<PegasosRule>(config.rule);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      ++step;
      const Subgradient g = subgradient(spec, data.row(idx), data.y[idx], model.theta, map);
      if (const auto* ada = std::get_if<AdaGradRule>(&config.rule)) {
        for (std::size_t d = 0; d < dim; ++d) {
          const double grad = g.vector[d] + lambda * model.theta[d];
          accum[d] += grad * grad;
          if (accum[d] > 0.0) model.theta[d] -= ada->eta0 * grad / std::sqrt(accum[d]);
        }
      } else if (const auto* sgd = std::get_if<SgdRule>(&config.rule)) {
        const double eta = sgd->eta0 / (1.0 + sgd->decay * static_cast<double>(step));
        for (std::size_t d = 0; d < dim; ++d) model.theta[d] -= eta * (g.vector[d] + lambda * model.theta[d]);
      } else {
        const double t = static_cast<double>(step);
        const double eta = 1.0 / (lambda * t);
        for (std::size_t d = 0; d < dim; ++d) model.theta[d] = (1.0 - 1.0 / t) * model.theta[d] - eta * g.vector[d];
        for (std::size_t d = 0; d < dim; ++d) average[d] += (model.theta[d] - average[d]) / t;
      }
    }

    LinearModel candidate = model;
    if (pegasos) candidate.theta = average;
    const double objective = regularized_risk(candidate, data);
    fit.objective_trace.push_back(objective);
    if (objective < best) {
      best = objective;
      fit.model = candidate;
    }
    fit.best_trace.push_back(best);
  }
  return fit;
}

DotProductCache::DotProductCache(std::shared_ptr<const Dataset> data, std::size_t max_entries)
    : data_(std::move(data)) {
  const std::size_t n = std::max<std::size_t>(1, data_->size());
  max_rows_ = std::max<std::size_t>(1, max_entries / n);
  norms_.resize(data_->size());
  for (std::size_t i = 0; i < data_->size(); ++i) norms_[i] = squared_norm(data_->row(i));
}

std::shared_ptr<const Vector> DotProductCache::row(std::size_t i) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = index_.find(i); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
  }
  auto values = std::make_shared<Vector>(data_->size());
  const auto xi = data_->row(i);
  for (std::size_t j = 0; j < data_->size(); ++j) (*values)[j] = j == i ? norms_[i] : dot(xi, data_->row(j));
  lru_.emplace_front(i, values);
  index_[i] = lru_.begin();
  while (lru_.size() > max_rows_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return values;
}

std::size_t DotProductCache::cached_rows() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return lru_.size();
}

Vector KernelModel::potentials(std::span<const double> x) const {
  if (x.size() != map.input_dim()) throw Error(ErrorCode::DimensionMismatch, "input length mismatch");
  const std::size_t k = map.classes();
  Vector f(k, 0.0);
  if (t_final == 0) return f;
  const double xx = squared_norm(x);
  for (std::size_t i = 0; i < train->size(); ++i) {
    const auto coef = alpha.row(i);
    if (std::all_of(coef.begin(), coef.end(), [](double a) { return a == 0.0; })) continue;
    const auto xi = train->row(i);
    const double zz = squared_norm(xi);
    const double xz = dot(xi, x);
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (coef[jp] == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j)
        f[j] += coef[jp] * advpred::kernel(kernel, map, zz, xx, xz, static_cast<Label>(jp + 1), static_cast<Label>(j + 1));
    }
  }
  const double scale = -1.0 / (lambda * static_cast<double>(t_final));
  for (double& v : f) v *= scale;
  return f;
}

KernelModel train_pegasos_kernel(const Dataset& data, const LossSpec& spec, const KernelSpec& kernel,
                                 const FeatureMap& map, double lambda, std::size_t iterations, std::uint64_t seed,
                                 const PegasosObserver& observer) {
  check_training_inputs(data, map);
  validate(spec);
  validate(kernel);
  if (iterations < 1) throw Error(ErrorCode::BadConfig, "PEGASOS needs at least one iteration");
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadConfig, "PEGASOS needs lambda > 0");

  const std::size_t n = data.size();
  const std::size_t k = data.classes;
  KernelModel model;
  model.train = std::make_shared<const Dataset>(data);
  model.train_digest = digest(data);
  model.kernel = kernel;
  model.map = map;
  model.spec = spec;
  model.lambda = lambda;
  model.alpha = Matrix(n, k, 0.0);

  DotProductCache cache(model.train);
  std::vector<std::size_t> active;
  std::vector<char> is_active(n, 0);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  Vector f(k);
  for (std::size_t t = 1; t <= iterations; ++t) {
    const std::size_t it = pick(rng);
    std::fill(f.begin(), f.end(), 0.0);
    if (t > 1 && !active.empty()) {
      const auto dots = cache.row(it);
      const double xx = cache.norm2(it);
      for (std::size_t ip : active) {
        const auto coef = model.alpha.row(ip);
        const double zz = cache.norm2(ip);
        const double xz = (*dots)[ip];
        for (std::size_t jp = 0; jp < k; ++jp) {
          if (coef[jp] == 0.0) continue;
          for (std::size_t j = 0; j < k; ++j)
            f[j] += coef[jp] * advpred::kernel(kernel, map, zz, xx, xz, static_cast<Label>(jp + 1),
                                               static_cast<Label>(j + 1));
        }
      }
      const double scale = -1.0 / (lambda * static_cast<double>(t - 1));
      for (double& v : f) v *= scale;
    }

    const Label y = data.y[it];
    AdversaryChoice choice = adversary_choice(spec, f, y);
    auto row = model.alpha.row(it);
    for (std::size_t j = 0; j < k; ++j) row[j] += choice.q[j];
    row[static_cast<std::size_t>(y - 1)] -= 1.0;
    if (!is_active[it]) {
      is_active[it] = 1;
      active.push_back(it);
    }
    if (observer) observer(PegasosStep{t, it, f, choice.q});
  }
  model.t_final = iterations;
  return model;
}

}  // namespace advpred
