#include "advpred/game.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace advpred {
namespace {

constexpr double kPivotTol = 1e-12;

// Solves  max_{x in simplex, v}  v + c'x  s.t.  (A x)_i + b_i >= v  for all rows i.
//
// With x_1 = 1 - sum_{j>1} x_j and v = w - B the problem becomes
//   max  sum_{j>1} (c_j - c_1) x_j + w
//   s.t. -sum_{j>1} (A_ij - A_i1) x_j + w <= A_i1 + b_i + B
//        sum_{j>1} x_j <= 1,   x, w >= 0
// The slack basis is the vertex x = e_1, so ties resolve to the lowest index.
// and B is picked so every right-hand side is non-negative, which makes the
// slack basis feasible. B also keeps v strictly above its artificial lower
// bound at any optimum, so the row duals sum to one.
SimplexGameSolution solve_mixed_game(const Matrix& a, std::span<const double> b, std::span<const double> c,
                                     std::size_t max_pivots) {
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();
  const std::size_t free_x = n - 1;
  const std::size_t num_vars = free_x + 1;     // x_1..x_{n-1}, w
  const std::size_t num_rows = rows + 1;       // game rows + sum row
  const std::size_t width = num_vars + num_rows + 1;
  const std::size_t rhs = width - 1;

  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j) lowest = std::min(lowest, a(i, j) + b[i]);
  const double bound = std::max(1.0, 1.0 - lowest);

  // Row num_rows is the objective row holding reduced costs z_j - c_j.
  Matrix t(num_rows + 1, width, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < free_x; ++j) t(i, j) = -(a(i, j + 1) - a(i, 0));
    t(i, free_x) = 1.0;
    t(i, num_vars + i) = 1.0;
    t(i, rhs) = a(i, 0) + b[i] + bound;
  }
  for (std::size_t j = 0; j < free_x; ++j) t(rows, j) = 1.0;
  t(rows, num_vars + rows) = 1.0;
  t(rows, rhs) = 1.0;

  const std::size_t obj = num_rows;
  for (std::size_t j = 0; j < free_x; ++j) t(obj, j) = -(c[j + 1] - c[0]);
  t(obj, free_x) = -1.0;

  std::vector<std::size_t> basis(num_rows);
  for (std::size_t i = 0; i < num_rows; ++i) basis[i] = num_vars + i;

  std::size_t pivots = 0;
  for (;;) {
    // Bland: lowest-index improving column, lowest-index basic variable on ratio ties.
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (t(obj, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = num_rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < num_rows; ++i) {
      const double coef = t(i, enter);
      if (coef <= kPivotTol) continue;
      const double ratio = t(i, rhs) / coef;
      if (leave == num_rows || ratio < best_ratio - 1e-14) {
        best_ratio = ratio;
        leave = i;
      } else if (ratio <= best_ratio + 1e-14 && basis[i] < basis[leave]) {
        leave = i;
      }
    }
    if (leave == num_rows) {
      // Cannot happen: the feasible region is bounded.
      throw Error(ErrorCode::SolverFailure, "unbounded pivot column in game LP");
    }
    if (++pivots > max_pivots) {
      std::ostringstream msg;
      msg << "pivot cap " << max_pivots << " exceeded on a " << rows << "x" << n << " game";
      throw Error(ErrorCode::SolverFailure, msg.str());
    }

    const double pivot = t(leave, enter);
    for (std::size_t j = 0; j < width; ++j) t(leave, j) /= pivot;
    for (std::size_t i = 0; i <= num_rows; ++i) {
      if (i == leave) continue;
      const double factor = t(i, enter);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t(i, j) -= factor * t(leave, j);
    }
    basis[leave] = enter;
  }

  Vector z(num_vars, 0.0);
  for (std::size_t i = 0; i < num_rows; ++i)
    if (basis[i] < num_vars) z[basis[i]] = t(i, rhs);

  SimplexGameSolution out;
  out.x.assign(n, 0.0);
  double rest = 1.0;
  for (std::size_t j = 0; j < free_x; ++j) {
    out.x[j + 1] = std::max(0.0, z[j]);
    rest -= out.x[j + 1];
  }
  out.x[0] = std::max(0.0, rest);
  out.v = z[free_x] - bound;

  out.duals.assign(rows, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    out.duals[i] = std::max(0.0, t(obj, num_vars + i));
    total += out.duals[i];
  }
  if (total > 0.0)
    for (double& d : out.duals) d /= total;

  out.objective = out.v;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  return out;
}

std::size_t default_cap(const LossMatrix& loss, const SolverOptions& options) {
  if (options.max_pivots != 0) return options.max_pivots;
  return 10 * (loss.classes() + loss.options() + 2);
}

void check_shapes(const LossMatrix& loss, std::span<const double> f) {
  if (loss.classes() == 0 || loss.options() == 0)
    throw Error(ErrorCode::DimensionMismatch, "empty loss matrix");
  if (f.size() != loss.classes())
    throw Error(ErrorCode::DimensionMismatch, "potential length does not match loss matrix columns");
}

}  // namespace

SimplexGameSolution solve_simplex_game(const Matrix& a, std::span<const double> b, std::span<const double> c,
                                       std::size_t max_pivots) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "empty game matrix");
  if (b.size() != a.rows() || c.size() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "game vector sizes");
  if (max_pivots == 0) max_pivots = 10 * (a.rows() + a.cols() + 2);
  return solve_mixed_game(a, b, c, max_pivots);
}

GameSolution solve_adversary_game(const LossMatrix& loss, std::span<const double> f,
                                  const SolverOptions& options) {
  check_shapes(loss, f);
  const Vector zeros(loss.options(), 0.0);
  SimplexGameSolution g = solve_mixed_game(loss.entries(), zeros, f, default_cap(loss, options));
  GameSolution s;
  s.q = std::move(g.x);
  s.p = std::move(g.duals);
  s.v = g.v;
  s.value = g.objective;
  return s;
}

GameSolution solve_predictor_game(const LossMatrix& loss, std::span<const double> f,
                                  const SolverOptions& options) {
  check_shapes(loss, f);
  // min_p max_i (L'p)_i + f_i  ==  -max_p min_i (-L'p - f)_i
  const std::size_t l = loss.options();
  const std::size_t k = loss.classes();
  Matrix a(k, l);
  Vector b(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < l; ++j) a(i, j) = -loss(j, i);
    b[i] = -f[i];
  }
  const Vector zeros(l, 0.0);
  SimplexGameSolution g = solve_mixed_game(a, b, zeros, default_cap(loss, options));
  GameSolution s;
  s.p = std::move(g.x);
  s.q = std::move(g.duals);
  s.v = -g.v;
  s.value = s.v;
  return s;
}

std::vector<PolytopeVertex> enumerate_vertices(const LossMatrix& loss) {
  const std::size_t l = loss.options();
  const std::size_t k = loss.classes();
  if (k + l > 20) throw Error(ErrorCode::TooLarge, "vertex enumeration limited to k + l <= 20");
  if (k == 0 || l == 0) throw Error(ErrorCode::DimensionMismatch, "empty loss matrix");

  const std::size_t dim = k + 1;
  const std::size_t total_rows = l + k + 2;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total_rows), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total_rows));
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < k; ++j) h(i, j) = loss(i, j);
    h(i, k) = -1.0;
  }
  for (std::size_t j = 0; j < k; ++j) h(l + j, j) = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    h(l + k, j) = 1.0;
    h(l + k + 1, j) = -1.0;
  }
  rhs(l + k) = 1.0;
  rhs(l + k + 1) = -1.0;

  constexpr double kTol = 1e-9;
  std::vector<PolytopeVertex> out;

  // The sum row is always active; choose the remaining k rows among the
  // first two blocks.
  const std::size_t pool = l + k;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  Eigen::MatrixXd sys(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd sys_rhs(static_cast<Eigen::Index>(dim));
  for (;;) {
    for (std::size_t r = 0; r < k; ++r) {
      sys.row(static_cast<Eigen::Index>(r)) = h.row(static_cast<Eigen::Index>(pick[r]));
      sys_rhs(static_cast<Eigen::Index>(r)) = rhs(static_cast<Eigen::Index>(pick[r]));
    }
    sys.row(static_cast<Eigen::Index>(k)) = h.row(static_cast<Eigen::Index>(l + k));
    sys_rhs(static_cast<Eigen::Index>(k)) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.rank() == static_cast<Eigen::Index>(dim)) {
      const Eigen::VectorXd point = lu.solve(sys_rhs);
      const Eigen::VectorXd slack = h * point - rhs;
      if (slack.minCoeff() >= -kTol) {
        bool seen = false;
        for (const auto& vtx : out) {
          double diff = 0.0;
          for (std::size_t j = 0; j < dim; ++j)
            diff = std::max(diff, std::abs(vtx.point[j] - point(static_cast<Eigen::Index>(j))));
          if (diff <= kTol) {
            seen = true;
            break;
          }
        }
        if (!seen) {
          PolytopeVertex vtx;
          vtx.point.assign(point.data(), point.data() + dim);
          for (std::size_t r = 0; r < total_rows; ++r)
            if (std::abs(slack(static_cast<Eigen::Index>(r))) <= kTol) vtx.active_rows.push_back(r);
          out.push_back(std::move(vtx));
        }
      }
    }

    // Next k-combination of [0, pool).
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == pool - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace advpred
