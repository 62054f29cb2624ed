#include "advpred/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "advpred/game.hpp"

namespace advpred {
namespace {

std::size_t check_label(std::span<const double> f, Label y) {
  if (f.empty()) throw Error(ErrorCode::DimensionMismatch, "empty potential vector");
  if (y < 1 || static_cast<std::size_t>(y) > f.size())
    throw Error(ErrorCode::InvalidSpec, "label " + std::to_string(y) + " outside [1, " +
                                            std::to_string(f.size()) + "]");
  return static_cast<std::size_t>(y - 1);
}

void check_abstain_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5))
    throw Error(ErrorCode::AlphaOutOfRange, "abstain penalty must lie in [0, 1/2], got " + std::to_string(alpha));
}

void check_weight(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidSpec, "weight must be positive, got " + std::to_string(alpha));
}

const char* base_name(BaseMetric b) {
  switch (b) {
    case BaseMetric::ZeroOne: return "zero-one";
    case BaseMetric::OrdinalAbsolute: return "ordinal-abs";
    case BaseMetric::OrdinalSquared: return "ordinal-sq";
  }
  return "?";
}

AdversaryChoice base_choice(BaseMetric base, std::span<const double> f, Label y, double weight) {
  switch (base) {
    case BaseMetric::ZeroOne: return zero_one_choice(f, y, weight);
    case BaseMetric::OrdinalAbsolute: return ordinal_abs_choice(f, y, weight);
    case BaseMetric::OrdinalSquared: return ordinal_sq_choice(f, y, weight);
  }
  throw Error(ErrorCode::UnsupportedBase, "unknown base metric");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

LossMatrix::LossMatrix(Matrix entries) : entries_(std::move(entries)) {
  for (double e : entries_.data())
    if (!(e >= 0.0) || !std::isfinite(e))
      throw Error(ErrorCode::InvalidSpec, "loss matrix entries must be finite and non-negative");
}

double LossMatrix::max_entry() const {
  const auto& d = entries_.data();
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

bool LossMatrix::is_natural() const {
  if (options() != classes()) return false;
  for (std::size_t y = 0; y < classes(); ++y)
    for (std::size_t r = 0; r < options(); ++r)
      if (r != y && !(entries_(y, y) < entries_(r, y))) return false;
  return true;
}

Weighted make_weighted(const LossSpec& base, double alpha) {
  check_weight(alpha);
  if (std::holds_alternative<ZeroOne>(base)) return {BaseMetric::ZeroOne, alpha};
  if (std::holds_alternative<OrdinalAbsolute>(base)) return {BaseMetric::OrdinalAbsolute, alpha};
  if (std::holds_alternative<OrdinalSquared>(base)) return {BaseMetric::OrdinalSquared, alpha};
  throw Error(ErrorCode::UnsupportedBase, "only zero-one, ordinal-abs and ordinal-sq can be weighted, not " +
                                              describe(base));
}

void validate(const LossSpec& spec) {
  std::visit(overloaded{
                 [](const Abstain& a) { check_abstain_alpha(a.alpha); },
                 [](const Weighted& w) { check_weight(w.alpha); },
                 [](const auto&) {},
             },
             spec);
}

std::string describe(const LossSpec& spec) {
  return std::visit(overloaded{
                        [](const ZeroOne&) -> std::string { return "zero-one"; },
                        [](const OrdinalAbsolute&) -> std::string { return "ordinal-abs"; },
                        [](const OrdinalSquared&) -> std::string { return "ordinal-sq"; },
                        [](const Abstain& a) -> std::string {
                          std::ostringstream s;
                          s << "abstain(alpha=" << a.alpha << ")";
                          return s.str();
                        },
                        [](const Weighted& w) -> std::string {
                          std::ostringstream s;
                          s << "weighted(" << base_name(w.base) << ", alpha=" << w.alpha << ")";
                          return s.str();
                        },
                        [](const General& g) -> std::string {
                          std::ostringstream s;
                          s << "general(" << g.matrix.options() << "x" << g.matrix.classes() << ")";
                          return s.str();
                        },
                    },
                    spec);
}

bool has_abstain_option(const LossSpec& spec) { return std::holds_alternative<Abstain>(spec); }

LossMatrix build_loss_matrix(const LossSpec& spec, std::size_t k) {
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "need at least two classes");
  validate(spec);
  auto square = [k](auto&& entry) {
    Matrix m(k, k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) m(r, c) = entry(static_cast<double>(r), static_cast<double>(c));
    return m;
  };
  auto zero_one = [](double r, double c) { return r == c ? 0.0 : 1.0; };
  auto absolute = [](double r, double c) { return std::abs(r - c); };
  auto squared = [](double r, double c) { return (r - c) * (r - c); };

  return std::visit(
      overloaded{
          [&](const ZeroOne&) { return LossMatrix(square(zero_one)); },
          [&](const OrdinalAbsolute&) { return LossMatrix(square(absolute)); },
          [&](const OrdinalSquared&) { return LossMatrix(square(squared)); },
          [&](const Abstain& a) {
            Matrix m(k + 1, k);
            for (std::size_t r = 0; r < k; ++r)
              for (std::size_t c = 0; c < k; ++c) m(r, c) = r == c ? 0.0 : 1.0;
            for (std::size_t c = 0; c < k; ++c) m(k, c) = a.alpha;
            return LossMatrix(std::move(m));
          },
          [&](const Weighted& w) {
            Matrix m = w.base == BaseMetric::ZeroOne           ? square(zero_one)
                       : w.base == BaseMetric::OrdinalAbsolute ? square(absolute)
                                                               : square(squared);
            for (double& e : m.data()) e *= w.alpha;
            return LossMatrix(std::move(m));
          },
          [&](const General& g) {
            if (g.matrix.classes() != k)
              throw Error(ErrorCode::InvalidSpec, "general loss matrix has " + std::to_string(g.matrix.classes()) +
                                                      " columns, expected " + std::to_string(k));
            return g.matrix;
          },
      },
      spec);
}

AdversaryChoice zero_one_choice(std::span<const double> f, Label y, double weight) {
  const std::size_t yi = check_label(f, y);
  const std::size_t k = f.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

  // Objective of the top-j prefix: (sum f + weight * (j - 1)) / j.
  double sum = f[order[0]];
  double best = sum;
  std::size_t best_size = 1;
  double previous = best;
  for (std::size_t j = 2; j <= k; ++j) {
    sum += f[order[j - 1]];
    const double value = (sum + weight * static_cast<double>(j - 1)) / static_cast<double>(j);
    if (value < previous) break;
    if (value > best) {
      best = value;
      best_size = j;
    }
    previous = value;
  }

  AdversaryChoice out;
  out.value = best - f[yi];
  out.q.assign(k, 0.0);
  for (std::size_t j = 0; j < best_size; ++j) out.q[order[j]] = 1.0 / static_cast<double>(best_size);
  return out;
}

AdversaryChoice ordinal_abs_choice(std::span<const double> f, Label y, double weight) {
  const std::size_t yi = check_label(f, y);
  const std::size_t k = f.size();
  // max_{i,j} (f_i + f_j + w (j - i)) / 2 splits into two independent scans.
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 1; i < k; ++i) {
    const double pos = static_cast<double>(i);
    if (f[i] - weight * pos > f[lo] - weight * static_cast<double>(lo)) lo = i;
    if (f[i] + weight * pos > f[hi] + weight * static_cast<double>(hi)) hi = i;
  }
  AdversaryChoice out;
  out.value = 0.5 * (f[lo] - weight * static_cast<double>(lo)) + 0.5 * (f[hi] + weight * static_cast<double>(hi)) -
              f[yi];
  out.q.assign(k, 0.0);
  out.q[lo] += 0.5;
  out.q[hi] += 0.5;
  return out;
}

AdversaryChoice ordinal_sq_choice(std::span<const double> f, Label y, double weight) {
  const std::size_t yi = check_label(f, y);
  const std::size_t k = f.size();

  const std::size_t top = argmax(f);
  double best = f[top];
  std::size_t bi = top, bj = top;
  double wi = 1.0, wj = 0.0;

  // Two-point vertices: i < l <= j, with 1-based offsets preserved by differences.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double span_ij = 2.0 * static_cast<double>(j - i);
      for (std::size_t l = i + 1; l <= j; ++l) {
        const double left = 2.0 * static_cast<double>(j - l) + 1.0;
        const double right = 2.0 * static_cast<double>(l - i) - 1.0;
        const double di = static_cast<double>(l - i);
        const double dj = static_cast<double>(j - l);
        const double value = (left * (f[i] + weight * di * di) + right * (f[j] + weight * dj * dj)) / span_ij;
        if (value > best) {
          best = value;
          bi = i;
          bj = j;
          wi = left / span_ij;
          wj = right / span_ij;
        }
      }
    }
  }

  AdversaryChoice out;
  out.value = best - f[yi];
  out.q.assign(k, 0.0);
  out.q[bi] += wi;
  out.q[bj] += wj;
  return out;
}

AdversaryChoice abstain_choice(std::span<const double> f, Label y, double alpha) {
  check_abstain_alpha(alpha);
  const std::size_t yi = check_label(f, y);
  const std::size_t k = f.size();
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "abstention needs at least two classes");

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

  const double mixed = (1.0 - alpha) * f[first] + alpha * f[second] + alpha;
  const double pure = f[first];
  AdversaryChoice out;
  out.q.assign(k, 0.0);
  if (mixed > pure) {
    out.value = mixed - f[yi];
    out.q[first] = 1.0 - alpha;
    out.q[second] += alpha;
  } else {
    out.value = pure - f[yi];
    out.q[first] = 1.0;
  }
  return out;
}

AdversaryChoice general_choice(std::span<const double> f, Label y, const LossMatrix& loss) {
  const std::size_t yi = check_label(f, y);
  GameSolution s = solve_adversary_game(loss, f);
  return {s.value - f[yi], std::move(s.q)};
}

AdversaryChoice adversary_choice(const LossSpec& spec, std::span<const double> f, Label y) {
  return std::visit(overloaded{
                        [&](const ZeroOne&) { return zero_one_choice(f, y); },
                        [&](const OrdinalAbsolute&) { return ordinal_abs_choice(f, y); },
                        [&](const OrdinalSquared&) { return ordinal_sq_choice(f, y); },
                        [&](const Abstain& a) { return abstain_choice(f, y, a.alpha); },
                        [&](const Weighted& w) {
                          check_weight(w.alpha);
                          return base_choice(w.base, f, y, w.alpha);
                        },
                        [&](const General& g) { return general_choice(f, y, g.matrix); },
                    },
                    spec);
}

double al_zero_one(std::span<const double> f, Label y) { return zero_one_choice(f, y).value; }
double al_ordinal_abs(std::span<const double> f, Label y) { return ordinal_abs_choice(f, y).value; }
double al_ordinal_sq(std::span<const double> f, Label y) { return ordinal_sq_choice(f, y).value; }
double al_abstain(std::span<const double> f, Label y, double alpha) { return abstain_choice(f, y, alpha).value; }

double al_weighted(std::span<const double> f, Label y, const LossSpec& base, double alpha) {
  const Weighted w = make_weighted(base, alpha);
  return base_choice(w.base, f, y, w.alpha).value;
}

double al_general(std::span<const double> f, Label y, const LossMatrix& loss) {
  return general_choice(f, y, loss).value;
}

double adversarial_loss(const LossSpec& spec, std::span<const double> f, Label y) {
  return adversary_choice(spec, f, y).value;
}

}  // namespace advpred
