#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "advpred/game.hpp"
#include "advpred/prediction.hpp"

using namespace advpred;

namespace {

// One-feature multiclass model whose potentials equal theta for x = [1].
Model fixed(const LossSpec& spec, Vector f) {
  const std::size_t k = f.size();
  return LinearModel{std::move(f), FeatureMap::multiclass(1, k), spec, 0.0};
}

double worst_case(const LossMatrix& L, std::span<const double> f, std::span<const double> p) {
  double worst = -1e300;
  for (std::size_t j = 0; j < L.classes(); ++j) {
    double col = f[j];
    for (std::size_t i = 0; i < L.options(); ++i) col += L(i, j) * p[i];
    worst = std::max(worst, col);
  }
  return worst;
}

}  // namespace

TEST_CASE("argmax examples") {
  const Vector one{1.0};
  CHECK(predict_argmax(fixed(ZeroOne{}, {0.2, 0.9, 0.1}), one).label == 2);
  CHECK(predict_argmax(fixed(ZeroOne{}, {1, 1, 0}), one).label == 1);
  try {
    predict_argmax(fixed(Abstain{0.5}, {1, 0, 0}), one);
    FAIL("expected SchemeUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemeUnavailable);
  }
}

TEST_CASE("probabilistic examples") {
  const Vector one{1.0};
  const Prediction a = predict_probabilistic(fixed(ZeroOne{}, {10, 0, 0}), one);
  CHECK(a.label == 1);
  CHECK(a.distribution[0] == doctest::Approx(1.0));
  const Prediction b = predict_probabilistic(fixed(ZeroOne{}, {0.4, 0.4}), one);
  CHECK(b.label == 1);
  CHECK(b.distribution[0] == doctest::Approx(0.5));
  CHECK(b.distribution[1] == doctest::Approx(0.5));
}

TEST_CASE("abstain rule examples") {
  const Prediction a = abstain_prediction(Vector{0.6, 0, 0}, 0.5);
  CHECK(a.label == 1);
  CHECK_FALSE(a.abstained);
  const Prediction b = abstain_prediction(Vector{0.3, 0, 0}, 0.5);
  CHECK(b.abstained);
  CHECK(b.label == 4);
  CHECK(b.distribution[0] == doctest::Approx(0.3));
  CHECK(b.distribution[1] == 0.0);
  CHECK(b.distribution[2] == 0.0);
  CHECK(b.distribution[3] == doctest::Approx(0.7));
  CHECK(abstain_prediction(Vector{0, 2.5, 1.2}, 0.5).distribution == Vector{0, 1, 0, 0});
  CHECK(abstain_prediction(Vector{0.5, 0}, 0.5).label == 1);
  CHECK_THROWS_AS(abstain_prediction(Vector{0.5, 0}, 0.75), Error);
}

TEST_CASE("abstain rule attains the predictor-game optimum") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> alpha_dist(0.0, 0.5);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t k = 2 + rep % 6;
    const double alpha = rep % 10 == 0 ? 0.5 : alpha_dist(rng);
    const auto f = oracle::random_vector(rng, k, -1.5, 1.5);
    const LossMatrix L = build_loss_matrix(Abstain{alpha}, k);
    const Prediction p = abstain_prediction(f, alpha);
    CHECK(worst_case(L, f, p.distribution) == doctest::Approx(solve_predictor_game(L, f).value).epsilon(1e-9));
    CHECK(std::size_t(p.label) == argmax(p.distribution) + 1);
  }
}

TEST_CASE("probabilistic and abstain schemes agree") {
  std::mt19937_64 rng(72);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t k = 2 + rep % 4;
    const auto f = oracle::random_vector(rng, k, -1.5, 1.5);
    const Prediction closed = abstain_prediction(f, 0.5);
    const Prediction lp = predict_probabilistic(fixed(Abstain{0.5}, f), Vector{1.0});
    const LossMatrix L = build_loss_matrix(Abstain{0.5}, k);
    CHECK(worst_case(L, f, lp.distribution) == doctest::Approx(worst_case(L, f, closed.distribution)).epsilon(1e-9));
    CHECK(predict_default(fixed(Abstain{0.5}, f), Vector{1.0}).label == closed.label);
  }
}

TEST_CASE("argmax and probabilistic coincide when q* is pure") {
  std::mt19937_64 rng(73);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 2 + rep % 5;
    auto f = oracle::random_vector(rng, k, -1, 1);
    const std::size_t top = rep % k;
    f[top] = *std::max_element(f.begin(), f.end()) + 3.0 * (k - 1) * (k - 1);
    for (const LossSpec& spec : {LossSpec{ZeroOne{}}, LossSpec{OrdinalAbsolute{}}, LossSpec{OrdinalSquared{}}}) {
      const Model m = fixed(spec, f);
      CHECK(predict_argmax(m, Vector{1.0}).label == predict_probabilistic(m, Vector{1.0}).label);
      CHECK(predict_default(m, Vector{1.0}).label == Label(top + 1));
    }
  }
}
