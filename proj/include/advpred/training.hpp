#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <variant>

#include "advpred/dataset.hpp"
#include "advpred/features.hpp"
#include "advpred/loss.hpp"

namespace advpred {

// eta_t = eta0 / (1 + decay * t)
struct SgdRule {
  double eta0 = 0.1;
  double decay = 0.0;
};
// per-coordinate eta0 / sqrt(sum of squared gradients)
struct AdaGradRule {
  double eta0 = 1.0;
};
// eta_t = 1 / (lambda t); the averaged iterate is the candidate solution
struct PegasosRule {};

using StepRule = std::variant<AdaGradRule, SgdRule, PegasosRule>;

struct OptimizerConfig {
  StepRule rule = AdaGradRule{};
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  std::optional<Vector> initial_theta;  // zero vector when unset
};

struct LinearModel {
  Vector theta;
  FeatureMap map;
  LossSpec spec;
  double lambda = 0.0;

  Vector potentials(std::span<const double> x) const { return map.potentials(theta, x); }
};

struct LinearFit {
  LinearModel model;
  Vector objective_trace;  // objective after each epoch, entry 0 is the initial point
  Vector best_trace;       // running minimum of objective_trace
};

// mean AL over the data + (lambda / 2) ||theta||^2
double regularized_risk(const LinearModel& model, const Dataset& data);

LinearFit train_linear(const Dataset& data, const LossSpec& spec, const FeatureMap& map, double lambda,
                       const OptimizerConfig& config = {});

/// Row cache of training-set dot products x_i'x_j, evicted least recently
/// used once the total entry count passes the bound. Safe to share between
/// threads.
class DotProductCache {
 public:
  explicit DotProductCache(std::shared_ptr<const Dataset> data, std::size_t max_entries = std::size_t{1} << 26);

  std::shared_ptr<const Vector> row(std::size_t i) const;
  double norm2(std::size_t i) const { return norms_[i]; }
  std::size_t cached_rows() const;

 private:
  std::shared_ptr<const Dataset> data_;
  std::size_t max_rows_;
  Vector norms_;
  mutable std::mutex mutex_;
  mutable std::list<std::pair<std::size_t, std::shared_ptr<const Vector>>> lru_;
  mutable std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

struct KernelModel {
  Matrix alpha;  // n x k accumulated q* - z
  std::shared_ptr<const Dataset> train;
  std::uint64_t train_digest = 0;
  KernelSpec kernel;
  FeatureMap map;
  LossSpec spec;
  double lambda = 1.0;
  std::size_t t_final = 0;

  // f_j = -(1 / (lambda t_final)) sum_{i', j'} alpha_(i', j') K(phi(x_i', j'), phi(x, j))
  Vector potentials(std::span<const double> x) const;
};

struct PegasosStep {
  std::size_t t = 0;        // 1-based iteration
  std::size_t example = 0;  // 0-based sampled index
  Vector potentials;
  Vector q_star;
};
using PegasosObserver = std::function<void(const PegasosStep&)>;

/// Kernelized PEGASOS over the adversarial surrogate. The potentials at step
/// t use theta^(t) = -(1 / (lambda (t - 1))) sum alpha^(t) phi, i.e. the
/// iterate produced by the t - 1 previous updates.
KernelModel train_pegasos_kernel(const Dataset& data, const LossSpec& spec, const KernelSpec& kernel,
                                 const FeatureMap& map, double lambda, std::size_t iterations, std::uint64_t seed,
                                 const PegasosObserver& observer = {});

}  // namespace advpred
