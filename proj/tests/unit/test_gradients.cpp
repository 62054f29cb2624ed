#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "advpred/gradients.hpp"

using namespace advpred;

namespace {

double al_at(const LossSpec& spec, const FeatureMap& map, std::span<const double> x, Label y,
             std::span<const double> theta) {
  return adversarial_loss(spec, map.potentials(theta, x), y);
}

Vector axpy(std::span<const double> a, double s, std::span<const double> b) {
  Vector out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  return out;
}

}  // namespace

TEST_CASE("zero-loss matrix at theta = 0 picks the first label") {
  const FeatureMap map = FeatureMap::multiclass(2, 3);
  const Vector x{1.0, -2.0};
  const LossMatrix zero(Matrix(3, 3, 0.0));
  const Subgradient g = subgrad_general(zero, x, 2, Vector(map.output_dim(), 0.0), map);
  CHECK(g.q_star == Vector{1.0, 0.0, 0.0});
  Vector expected = map(x, 1);
  const Vector phi_y = map(x, 2);
  for (std::size_t i = 0; i < expected.size(); ++i) expected[i] -= phi_y[i];
  CHECK(g.vector == expected);
}

TEST_CASE("ordinal-abs tie rule") {
  const FeatureMap map = FeatureMap::multiclass(2, 3);
  const Vector x{0.5, 1.5};
  const Subgradient g = subgrad_ordinal_abs(x, 2, Vector(map.output_dim(), 0.0), map);
  CHECK(g.q_star == Vector{0.5, 0.0, 0.5});
  const Vector p1 = map(x, 1), p2 = map(x, 2), p3 = map(x, 3);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(g.vector[i] == doctest::Approx(0.5 * (p1[i] + p3[i]) - p2[i]));
}

TEST_CASE("abstain h branch gives a zero subgradient") {
  const FeatureMap map = FeatureMap::multiclass(1, 2);
  const Vector x{1.0};
  const Vector theta{2.0, 0.0};
  const Subgradient g = subgrad_abstain(x, 1, theta, map, 1.0 / 3.0);
  for (double v : g.vector) CHECK(v == 0.0);
  CHECK(g.loss == doctest::Approx(0.0));
  CHECK_THROWS_AS(subgrad_abstain(x, 1, theta, map, 0.7), Error);
}

TEST_CASE("zero-one subgradient averages over the optimal set") {
  const FeatureMap map = FeatureMap::thresholded(2, 3);
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = oracle::random_vector(rng, 2, -1, 1);
    const auto theta = oracle::random_vector(rng, map.output_dim(), -1, 1);
    const Vector f = map.potentials(theta, x);
    // optimal subset by enumeration
    unsigned long best_mask = 0;
    double best = -1e300;
    for (unsigned long mask = 1; mask < 8; ++mask) {
      double s = 0.0;
      int n = 0;
      for (int i = 0; i < 3; ++i)
        if (mask >> i & 1ul) s += f[i], ++n;
      const double v = (s + n - 1) / n;
      if (v > best + 1e-12) best = v, best_mask = mask;
    }
    const Subgradient g = subgrad_zero_one(x, 3, theta, map);
    Vector expected(map.output_dim(), 0.0);
    const int size = __builtin_popcountl(best_mask);
    for (int i = 0; i < 3; ++i)
      if (best_mask >> i & 1ul) map.accumulate(x, i + 1, 1.0 / size, expected);
    map.accumulate(x, 3, -1.0, expected);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(g.vector[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("matched distribution gives zero") {
  const FeatureMap map = FeatureMap::multiclass(3, 4);
  const Vector x{0.1, 0.2, 0.3};
  Vector theta(map.output_dim(), 0.0);
  // make class 2 dominate by a wide margin so q* = e_2
  for (std::size_t j = 0; j < 3; ++j) theta[3 + j] = 100.0 * x[j];
  for (const LossSpec& spec : {LossSpec{ZeroOne{}}, LossSpec{OrdinalAbsolute{}}, LossSpec{OrdinalSquared{}}}) {
    const Subgradient g = subgradient(spec, x, 2, theta, map);
    for (double v : g.vector) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("finite differences and the subgradient inequality") {
  std::mt19937_64 rng(42);
  const std::vector<LossSpec> specs{ZeroOne{},
                                    OrdinalAbsolute{},
                                    OrdinalSquared{},
                                    Abstain{0.5},
                                    Weighted{BaseMetric::OrdinalSquared, 0.5},
                                    General{build_loss_matrix(OrdinalAbsolute{}, 4)}};
  for (const auto& spec : specs) {
    for (int rep = 0; rep < 40; ++rep) {
      const std::size_t k = std::holds_alternative<General>(spec) ? 4 : 2 + rep % 4;
      const FeatureMap map = rep % 2 ? FeatureMap::thresholded(3, k) : FeatureMap::multiclass(3, k);
      const auto x = oracle::random_vector(rng, 3, -1, 1);
      const auto theta = oracle::random_vector(rng, map.output_dim(), -2, 2);
      const auto dir = oracle::random_vector(rng, map.output_dim(), -1, 1);
      const Label y = 1 + rep % static_cast<int>(k);
      const Subgradient g = subgradient(spec, x, y, theta, map);
      CHECK(g.loss == doctest::Approx(al_at(spec, map, x, y, theta)).epsilon(1e-10));

      const double h = 1e-6;
      const double fd =
          (al_at(spec, map, x, y, axpy(theta, h, dir)) - al_at(spec, map, x, y, axpy(theta, -h, dir))) / (2 * h);
      const double gd = dot(g.vector, dir);
      CHECK(std::abs(fd - gd) <= 1e-4 * std::max(1.0, std::abs(gd)));

      const auto probe = oracle::random_vector(rng, map.output_dim(), -3, 3);
      Vector delta(probe);
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= theta[i];
      CHECK(al_at(spec, map, x, y, probe) >= g.loss + dot(g.vector, delta) - 1e-8);
    }
  }
}

TEST_CASE("closed-form q* is optimal for the LP") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 2 + rep % 5;
    const FeatureMap map = FeatureMap::multiclass(2, k);
    const auto x = oracle::random_vector(rng, 2, -1, 1);
    const auto theta = oracle::random_vector(rng, map.output_dim(), -2, 2);
    const Label y = 1 + rep % static_cast<int>(k);
    const Subgradient closed = subgrad_ordinal_abs(x, y, theta, map);
    const Subgradient lp = subgrad_general(build_loss_matrix(OrdinalAbsolute{}, k), x, y, theta, map);
    CHECK(closed.loss == doctest::Approx(lp.loss).epsilon(1e-9));
    const Vector f = map.potentials(theta, x);
    const LossMatrix L = build_loss_matrix(OrdinalAbsolute{}, k);
    double worst = 1e300;
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < k; ++j) row += L(i, j) * closed.q_star[j];
      worst = std::min(worst, row);
    }
    CHECK(worst + dot(f, closed.q_star) - f[y - 1] == doctest::Approx(lp.loss).epsilon(1e-9));
  }
}

TEST_CASE("dimension checks") {
  const FeatureMap map = FeatureMap::multiclass(2, 3);
  CHECK_THROWS_AS(subgrad_zero_one(Vector{1.0}, 1, Vector(6, 0.0), map), Error);
  CHECK_THROWS_AS(subgrad_zero_one(Vector{1.0, 2.0}, 1, Vector(5, 0.0), map), Error);
}
