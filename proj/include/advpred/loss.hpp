#pragma once

// Adversarial surrogate losses.
//
// For a loss matrix L (rows: predictor options, columns: true labels) and a
// potential vector f, the adversarial surrogate is the value of the game
//
//   AL(f, y) = max_{q in simplex} min_{p in simplex} p'Lq + f'q - f_y
//
// Closed forms exist for zero-one, ordinal absolute, ordinal squared,
// abstention and the alpha-weighted standard metrics. Everything else goes
// through the game solver.

#include <span>
#include <string>
#include <variant>

#include "advpred/common.hpp"

namespace advpred {

/// l x k matrix of non-negative penalties loss(prediction, truth).
class LossMatrix {
 public:
  LossMatrix() = default;
  explicit LossMatrix(Matrix entries);

  std::size_t options() const noexcept { return entries_.rows(); }
  std::size_t classes() const noexcept { return entries_.cols(); }

  // 0-based option row, 0-based truth column.
  double operator()(std::size_t option, std::size_t truth) const { return entries_(option, truth); }
  const Matrix& entries() const noexcept { return entries_; }
  double max_entry() const;

  // True when square and loss(y, y) < loss(y', y) for every y' != y.
  bool is_natural() const;

  bool operator==(const LossMatrix&) const = default;

 private:
  Matrix entries_;
};

struct ZeroOne {
  bool operator==(const ZeroOne&) const = default;
};
struct OrdinalAbsolute {
  bool operator==(const OrdinalAbsolute&) const = default;
};
struct OrdinalSquared {
  bool operator==(const OrdinalSquared&) const = default;
};
struct Abstain {
  double alpha = 0.5;
  bool operator==(const Abstain&) const = default;
};

enum class BaseMetric { ZeroOne, OrdinalAbsolute, OrdinalSquared };

struct Weighted {
  BaseMetric base = BaseMetric::ZeroOne;
  double alpha = 1.0;
  bool operator==(const Weighted&) const = default;
};
struct General {
  LossMatrix matrix;
  bool operator==(const General&) const = default;
};

using LossSpec = std::variant<ZeroOne, OrdinalAbsolute, OrdinalSquared, Abstain, Weighted, General>;

// Wraps one of the three standard metrics; UnsupportedBase for anything else.
Weighted make_weighted(const LossSpec& base, double alpha);

// Throws InvalidSpec / AlphaOutOfRange when the spec's parameters are out of range.
void validate(const LossSpec& spec);

std::string describe(const LossSpec& spec);

bool has_abstain_option(const LossSpec& spec);

LossMatrix build_loss_matrix(const LossSpec& spec, std::size_t k);

/// The value of the adversary's game together with one optimal adversary
/// distribution q* (what the subgradient is built from).
struct AdversaryChoice {
  double value = 0.0;
  Vector q;
};

AdversaryChoice zero_one_choice(std::span<const double> f, Label y, double weight = 1.0);
AdversaryChoice ordinal_abs_choice(std::span<const double> f, Label y, double weight = 1.0);
AdversaryChoice ordinal_sq_choice(std::span<const double> f, Label y, double weight = 1.0);
AdversaryChoice abstain_choice(std::span<const double> f, Label y, double alpha);
AdversaryChoice general_choice(std::span<const double> f, Label y, const LossMatrix& loss);

// Dispatches to the closed form when one exists, else to the LP.
AdversaryChoice adversary_choice(const LossSpec& spec, std::span<const double> f, Label y);

double al_zero_one(std::span<const double> f, Label y);
double al_ordinal_abs(std::span<const double> f, Label y);
double al_ordinal_sq(std::span<const double> f, Label y);
double al_abstain(std::span<const double> f, Label y, double alpha);
double al_weighted(std::span<const double> f, Label y, const LossSpec& base, double alpha);
double al_general(std::span<const double> f, Label y, const LossMatrix& loss);

double adversarial_loss(const LossSpec& spec, std::span<const double> f, Label y);

}  // namespace advpred
