#pragma once

// Numerical Fisher-consistency checks. Potentials are optimized directly over
// R^k against a known conditional label distribution d, then the minimizer is
// compared with the Bayes-optimal decision for the target loss.

#include <cstdint>
#include <string>
#include <vector>

#include "advpred/common.hpp"
#include "advpred/loss.hpp"

namespace advpred {

class TrueDistribution {
 public:
  explicit TrueDistribution(Vector d);
  const Vector& values() const noexcept { return d_; }
  std::size_t size() const noexcept { return d_.size(); }

 private:
  Vector d_;
};

// All options y with (L d)_y within 1e-12 of the minimum; 1-based.
std::vector<Label> bayes_set(const LossMatrix& loss, const TrueDistribution& d);

struct MinimizeBudget {
  std::size_t max_iterations = 20000;  // per restart
  std::size_t restarts = 10;
  double tolerance = 1e-8;  // optimality gap that counts as converged
  std::uint64_t seed = 0;
};

struct ExpectedLossMinimum {
  Vector f;  // minimizer, shifted so max_y f_y = 0
  double value = 0.0;
  std::size_t iterations = 0;
};

// Polyak subgradient descent on g(f) = sum_y d_y AL(f, y), whose subgradient
// is q*(f) - d, targeting the known optimum min_y (L d)_y. When the step
// budget runs out, the collected subgradient cuts seed a cutting-plane
// finish. Converged when g(f) - min_y (L d)_y <= tolerance. Throws
// BudgetExceeded when no restart gets there.
ExpectedLossMinimum minimize_expected_al(const LossSpec& spec, const TrueDistribution& d,
                                         const MinimizeBudget& budget = {});

struct ConsistencyTrial {
  Vector d;
  Vector f;
  std::vector<Label> argmax_f;  // within the argmax tolerance
  std::vector<Label> bayes;
  double reflective_gap = 0.0;    // square losses only
  double stationarity_gap = 0.0;  // ||q* - d||_inf over the adversary's optimal face
  double predictor_excess = 0.0;  // abstain: p*'Ld - min_y (Ld)_y
  bool ok = true;

  std::string to_line() const;
};

struct ConsistencyOptions {
  std::size_t classes = 3;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  double argmax_tolerance = 1e-3;
  double characterization_tolerance = 5e-3;
  double bayes_margin = 0.02;  // resample d until the Bayes option wins by this much
  MinimizeBudget budget{};
};

struct ConsistencyReport {
  std::string spec;
  std::size_t classes = 0;
  std::vector<ConsistencyTrial> trials;
  std::size_t violations = 0;
  double worst_reflective_gap = 0.0;
  double worst_stationarity_gap = 0.0;

  std::string to_text() const;
};

// One trial against a caller-chosen d. When the Bayes set has ties only the
// containment argmax f* in Bayes set is checked.
ConsistencyTrial check_distribution(const LossSpec& spec, const TrueDistribution& d,
                                    const ConsistencyOptions& options = {});

ConsistencyReport check_consistency(const LossSpec& spec, const ConsistencyOptions& options = {});

}  // namespace advpred
