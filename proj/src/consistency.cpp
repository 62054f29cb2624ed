#include "advpred/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "advpred/game.hpp"
#include "advpred/prediction.hpp"

namespace advpred {
namespace {

std::size_t label_count(const LossSpec& spec, std::size_t k) { return build_loss_matrix(spec, k).classes(); }

// g(f) = V(f) - d'f with V(f) = AL(f, y) + f_y for any y; subgradient q*(f) - d.
struct Evaluation {
  double value;
  Vector subgradient;
};

Evaluation evaluate(const LossSpec& spec, const Vector& d, const Vector& f) {
  AdversaryChoice c = adversary_choice(spec, f, 1);
  double value = c.value + f[0];
  Vector s(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    value -= d[i] * f[i];
    s[i] = c.q[i] - d[i];
  }
  return {value, std::move(s)};
}

struct RunResult {
  Vector f;
  double value;
  std::size_t iterations;
  bool converged;
};

// Linearizations g(f) >= a + s'f collected from oracle calls; one per
// distinct adversary vertex.
struct Cuts {
  std::vector<Vector> slopes;
  Vector offsets;

  void add(const Vector& f, const Evaluation& e) {
    for (const auto& s : slopes) {
      double diff = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) diff = std::max(diff, std::abs(s[i] - e.subgradient[i]));
      if (diff <= 1e-12) return;
    }
    double a = e.value;
    for (std::size_t i = 0; i < f.size(); ++i) a -= e.subgradient[i] * f[i];
    slopes.push_back(e.subgradient);
    offsets.push_back(a);
  }
};

// Polyak steps with the exact optimal value as target. By the minimax theorem
// min_f g(f) = max_q min_f (v(q) + f'(q - d)) = v(d) = min_y (L d)_y.
RunResult polyak_descent(const LossSpec& spec, const Vector& d, Vector f, const MinimizeBudget& budget,
                         double target, Cuts& cuts) {
  Vector best_f = f;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= budget.max_iterations; ++it) {
    const Evaluation e = evaluate(spec, d, f);
    cuts.add(f, e);
    if (e.value < best) {
      best = e.value;
      best_f = f;
    }
    const double gap = e.value - target;
    if (gap <= budget.tolerance) return {best_f, best, it, true};
    double norm2 = 0.0;
    for (double s : e.subgradient) norm2 += s * s;
    if (norm2 == 0.0) return {best_f, best, it, false};
    const double step = gap / norm2;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= step * e.subgradient[i];
  }
  return {best_f, best, budget.max_iterations, false};
}

// Kelley cutting planes over ||f||_1 <= radius. The master
//   min_f max_j a_j + s_j'f
// is solved as the game max_{lambda} a'lambda - radius ||S lambda||_inf whose
// row duals give f. g is polyhedral, so new cuts run out after finitely many
// steps.
RunResult cutting_planes(const LossSpec& spec, const Vector& d, Cuts& cuts, double radius, double target,
                         double tolerance, RunResult start) {
  const std::size_t k = d.size();
  for (std::size_t it = 1; it <= 500; ++it) {
    const std::size_t m = cuts.slopes.size();
    Matrix a(2 * k, m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < k; ++i) {
        a(2 * i, j) = radius * cuts.slopes[j][i];
        a(2 * i + 1, j) = -radius * cuts.slopes[j][i];
      }
    const Vector zeros(2 * k, 0.0);
    const SimplexGameSolution master = solve_simplex_game(a, zeros, cuts.offsets, 200 * (2 * k + m + 2));
    Vector f(k);
    for (std::size_t i = 0; i < k; ++i) f[i] = radius * (master.duals[2 * i] - master.duals[2 * i + 1]);

    const Evaluation e = evaluate(spec, d, f);
    start.iterations += 1;
    if (e.value < start.value) {
      start.value = e.value;
      start.f = f;
    }
    if (e.value - target <= tolerance) {
      start.converged = true;
      return start;
    }
    const std::size_t before = cuts.slopes.size();
    cuts.add(f, e);
    if (cuts.slopes.size() == before) break;  // no new piece: the ball is too small
  }
  return start;
}

std::string join(const Vector& v) {
  std::ostringstream s;
  s << std::setprecision(6) << "[";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  s << "]";
  return s.str();
}

std::string join(const std::vector<Label>& v) {
  std::ostringstream s;
  s << "{";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  s << "}";
  return s.str();
}

// min over the near-optimal adversary face of ||q - d||_inf, as a small game.
double stationarity_distance(const LossMatrix& loss, const Vector& f, const Vector& d, double face_tolerance) {
  const auto vertices = enumerate_vertices(loss);
  const std::size_t k = loss.classes();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> objective;
  for (const auto& vtx : vertices) {
    double o = vtx.point[k];
    for (std::size_t j = 0; j < k; ++j) o += f[j] * vtx.point[j];
    objective.push_back(o);
    best = std::max(best, o);
  }
  std::vector<const PolytopeVertex*> face;
  for (std::size_t s = 0; s < vertices.size(); ++s)
    if (objective[s] >= best - face_tolerance) face.push_back(&vertices[s]);

  Matrix a(2 * k, face.size());
  Vector b(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < face.size(); ++s) {
      a(2 * i, s) = -face[s]->point[i];
      a(2 * i + 1, s) = face[s]->point[i];
    }
    b[2 * i] = d[i];
    b[2 * i + 1] = -d[i];
  }
  const Vector c(face.size(), 0.0);
  return -solve_simplex_game(a, b, c).v;
}

}  // namespace

TrueDistribution::TrueDistribution(Vector d) : d_(std::move(d)) {
  if (d_.empty()) throw Error(ErrorCode::InvalidSpec, "empty distribution");
  double total = 0.0;
  for (double v : d_) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidSpec, "true distribution must be strictly positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidSpec, "true distribution must sum to one");
}

std::vector<Label> bayes_set(const LossMatrix& loss, const TrueDistribution& d) {
  if (loss.classes() != d.size()) throw Error(ErrorCode::DimensionMismatch, "distribution length vs loss columns");
  Vector risk(loss.options(), 0.0);
  for (std::size_t r = 0; r < loss.options(); ++r)
    for (std::size_t c = 0; c < loss.classes(); ++c) risk[r] += loss(r, c) * d.values()[c];
  const double lowest = *std::min_element(risk.begin(), risk.end());
  std::vector<Label> out;
  for (std::size_t r = 0; r < risk.size(); ++r)
    if (risk[r] <= lowest + 1e-12) out.push_back(static_cast<Label>(r + 1));
  return out;
}

ExpectedLossMinimum minimize_expected_al(const LossSpec& spec, const TrueDistribution& d,
                                         const MinimizeBudget& budget) {
  const std::size_t k = d.size();
  if (k > 10) throw Error(ErrorCode::TooLarge, "expected-loss minimization limited to k <= 10");
  if (label_count(spec, k) != k) throw Error(ErrorCode::DimensionMismatch, "spec and distribution sizes differ");
  const LossMatrix loss = build_loss_matrix(spec, k);
  const double scale = std::max(1.0, loss.max_entry());
  double target = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < loss.options(); ++r) {
    double risk = 0.0;
    for (std::size_t c = 0; c < k; ++c) risk += loss(r, c) * d.values()[c];
    target = std::min(target, risk);
  }

  const double radius = 10.0 * static_cast<double>(k) * scale;

  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> init(-scale, scale);
  bool any = false;
  ExpectedLossMinimum out;
  out.value = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, budget.restarts); ++r) {
    Vector f0(k, 0.0);
    if (r > 0)
      for (double& v : f0) v = init(rng);
    Cuts cuts;
    RunResult run = polyak_descent(spec, d.values(), f0, budget, target, cuts);
    if (!run.converged) run = cutting_planes(spec, d.values(), cuts, radius, target, budget.tolerance, run);
    out.iterations += run.iterations;
    if (!run.converged) continue;
    any = true;
    if (run.value < out.value) {
      out.value = run.value;
      out.f = std::move(run.f);
    }
  }
  if (!any) throw Error(ErrorCode::BudgetExceeded, "no restart reached the tolerance");
  const double top = *std::max_element(out.f.begin(), out.f.end());
  for (double& v : out.f) v -= top;
  return out;
}

std::string ConsistencyTrial::to_line() const {
  std::ostringstream s;
  s << "d=" << join(d) << " argmax_f=" << join(argmax_f) << " bayes=" << join(bayes)
    << std::setprecision(3) << std::scientific << " reflective=" << reflective_gap
    << " stationarity=" << stationarity_gap << " predictor_excess=" << predictor_excess
    << (ok ? " ok" : " VIOLATION");
  return s.str();
}

std::string ConsistencyReport::to_text() const {
  std::ostringstream s;
  for (const auto& t : trials) s << t.to_line() << "\n";
  s << "spec=" << spec << " k=" << classes << " trials=" << trials.size() << " violations=" << violations
    << std::setprecision(3) << std::scientific << " worst_reflective=" << worst_reflective_gap
    << " worst_stationarity=" << worst_stationarity_gap << "\n";
  return s.str();
}

ConsistencyTrial check_distribution(const LossSpec& spec, const TrueDistribution& d,
                                    const ConsistencyOptions& options) {
  const std::size_t k = d.size();
  const LossMatrix loss = build_loss_matrix(spec, k);
  ConsistencyTrial trial;
  trial.d = d.values();
  trial.bayes = bayes_set(loss, d);
  const ExpectedLossMinimum m = minimize_expected_al(spec, d, options.budget);
  trial.f = m.f;
  for (std::size_t y = 0; y < k; ++y)
    if (m.f[y] >= -options.argmax_tolerance) trial.argmax_f.push_back(static_cast<Label>(y + 1));

  const bool unique = trial.bayes.size() == 1;
  trial.stationarity_gap = stationarity_distance(loss, m.f, d.values(), options.argmax_tolerance);

  if (loss.options() == loss.classes()) {
    const bool contained = std::all_of(trial.argmax_f.begin(), trial.argmax_f.end(), [&](Label y) {
      return std::find(trial.bayes.begin(), trial.bayes.end(), y) != trial.bayes.end();
    });
    trial.ok = contained;
    if (unique) {
      const std::size_t b = static_cast<std::size_t>(trial.bayes.front() - 1);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t y = 0; y < k; ++y) {
        const double c = m.f[y] + loss(b, y);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      trial.reflective_gap = hi - lo;
      trial.ok = trial.ok && trial.reflective_gap <= options.characterization_tolerance &&
                 trial.stationarity_gap <= options.characterization_tolerance;
    }
  } else {
    Vector p;
    if (const auto* a = std::get_if<Abstain>(&spec))
      p = abstain_prediction(m.f, a->alpha).distribution;
    else
      p = solve_predictor_game(loss, m.f).p;
    Vector risk(loss.options(), 0.0);
    for (std::size_t r = 0; r < loss.options(); ++r)
      for (std::size_t c = 0; c < k; ++c) risk[r] += loss(r, c) * d.values()[c];
    const double bayes_risk = *std::min_element(risk.begin(), risk.end());
    trial.predictor_excess = std::inner_product(p.begin(), p.end(), risk.begin(), 0.0) - bayes_risk;
    trial.ok = trial.predictor_excess <= options.argmax_tolerance;
    if (unique) trial.ok = trial.ok && trial.stationarity_gap <= options.characterization_tolerance;
  }
  return trial;
}

ConsistencyReport check_consistency(const LossSpec& spec, const ConsistencyOptions& options) {
  const std::size_t k = options.classes;
  const LossMatrix loss = build_loss_matrix(spec, k);
  ConsistencyReport report;
  report.spec = describe(spec);
  report.classes = k;

  std::mt19937_64 rng(options.seed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (std::size_t t = 0; t < options.trials; ++t) {
    Vector d(k);
    for (;;) {
      double total = 0.0;
      for (double& v : d) {
        v = std::max(gamma(rng), 1e-6);
        total += v;
      }
      for (double& v : d) v /= total;
      Vector risk(loss.options(), 0.0);
      for (std::size_t r = 0; r < loss.options(); ++r)
        for (std::size_t c = 0; c < k; ++c) risk[r] += loss(r, c) * d[c];
      std::sort(risk.begin(), risk.end());
      if (risk.size() < 2 || risk[1] - risk[0] >= options.bayes_margin) break;
    }
    MinimizeBudget budget = options.budget;
    budget.seed = options.budget.seed + t;
    ConsistencyOptions per_trial = options;
    per_trial.budget = budget;
    ConsistencyTrial trial = check_distribution(spec, TrueDistribution(d), per_trial);
    if (!trial.ok) ++report.violations;
    report.worst_reflective_gap = std::max(report.worst_reflective_gap, trial.reflective_gap);
    report.worst_stationarity_gap = std::max(report.worst_stationarity_gap, trial.stationarity_gap);
    report.trials.push_back(std::move(trial));
  }
  return report;
}

}  // namespace advpred
