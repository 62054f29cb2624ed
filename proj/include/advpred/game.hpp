#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advpred/common.hpp"
#include "advpred/loss.hpp"

namespace advpred {

struct GameSolution {
  Vector q;      // adversary distribution over the k labels
  Vector p;      // predictor distribution over the l options
  double v = 0;  // slack variable at the optimum
  // Objective at the optimum: v + f'q for the adversary game, v for the
  // predictor game.
  double value = 0;
};

struct SolverOptions {
  // 0 selects the default cap of 10 * (k + l + 2) pivots.
  std::size_t max_pivots = 0;
};

/// max_{q, v} v + f'q  s.t.  L_(i,:) q >= v for every option i, q in the simplex.
/// Dense primal simplex, Bland's rule. p is recovered from the row duals.
GameSolution solve_adversary_game(const LossMatrix& loss, std::span<const double> f,
                                  const SolverOptions& options = {});

/// min_{p, v} v  s.t.  v >= L_(:,i)' p + f_i for every label i, p in the simplex.
/// q is recovered from the row duals.
GameSolution solve_predictor_game(const LossMatrix& loss, std::span<const double> f,
                                  const SolverOptions& options = {});

/// max_{x in simplex, v} v + c'x  s.t.  (A x)_i + b_i >= v for every row i.
/// x is the maximizer's strategy, `duals` the minimizer's (one per row).
struct SimplexGameSolution {
  Vector x;
  Vector duals;
  double v = 0;
  double objective = 0;
};

SimplexGameSolution solve_simplex_game(const Matrix& a, std::span<const double> b, std::span<const double> c,
                                       std::size_t max_pivots = 0);

/// A vertex [q; v] of the adversary polytope together with every half-space
/// row active at it. Rows are indexed as: options 0..l-1, non-negativity
/// l..l+k-1, then the two sum-to-one rows l+k and l+k+1.
struct PolytopeVertex {
  Vector point;  // length k + 1
  std::vector<std::size_t> active_rows;
};

/// All extreme points of {[q; v] : Lq >= v1, q >= 0, 1'q = 1}. Brute force
/// over equality subsystems; guarded to k + l <= 20.
std::vector<PolytopeVertex> enumerate_vertices(const LossMatrix& loss);

}  // namespace advpred
