#pragma once

// Brute-force reference values used by the unit and acceptance tests. Nothing
// here calls into the library's closed forms or its LP.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// max over nonempty S of (sum_{i in S} f_i + w (|S| - 1)) / |S| - f_y
inline double zero_one_subsets(const Vec& f, int y, double w = 1.0) {
  const std::size_t k = f.size();
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1ul) {
        sum += f[i];
        ++size;
      }
    best = std::max(best, (sum + w * (size - 1)) / size);
  }
  return best - f[y - 1];
}

// max over pairs (i, j) of (f_i + f_j + w (j - i)) / 2 - f_y, labels 1-based
inline double ordinal_abs_pairs(const Vec& f, int y, double w = 1.0) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      best = std::max(best, (f[i] + f[j] + w * (static_cast<double>(j) - static_cast<double>(i))) / 2.0);
  return best - f[y - 1];
}

// max over i < l <= j of the two-point mixtures, and over the singletons.
inline double ordinal_sq_triples(const Vec& f, int y, double w = 1.0) {
  const int k = static_cast<int>(f.size());
  double best = *std::max_element(f.begin(), f.end());
  for (int i = 1; i <= k; ++i)
    for (int l = i + 1; l <= k; ++l)
      for (int j = l; j <= k; ++j) {
        const double a = 2.0 * (j - l) + 1.0;
        const double b = 2.0 * (l - i) - 1.0;
        const double v = (a * (f[i - 1] + w * (l - i) * (l - i)) + b * (f[j - 1] + w * (j - l) * (j - l))) /
                         (2.0 * (j - i));
        best = std::max(best, v);
      }
  return best - f[y - 1];
}

// all k^2 hyperplanes of the abstention game
inline double abstain_hyperplanes(const Vec& f, int y, double alpha) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    best = std::max(best, f[i]);
    for (std::size_t j = 0; j < f.size(); ++j)
      if (i != j) best = std::max(best, (1.0 - alpha) * f[i] + alpha * f[j] + alpha);
  }
  return best - f[y - 1];
}

// Row-major l x k loss matrix.
struct Loss {
  std::size_t l = 0, k = 0;
  Vec e;
  double operator()(std::size_t r, std::size_t c) const { return e[r * k + c]; }
};

inline Loss zero_one(std::size_t k) {
  Loss m{k, k, Vec(k * k, 1.0)};
  for (std::size_t i = 0; i < k; ++i) m.e[i * k + i] = 0.0;
  return m;
}

inline Loss absolute(std::size_t k, double w = 1.0) {
  Loss m{k, k, Vec(k * k)};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m.e[i * k + j] = w * std::abs(double(i) - double(j));
  return m;
}

inline Loss squared(std::size_t k, double w = 1.0) {
  Loss m{k, k, Vec(k * k)};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m.e[i * k + j] = w * (double(i) - double(j)) * (double(i) - double(j));
  return m;
}

inline Loss abstain(std::size_t k, double alpha) {
  Loss z = zero_one(k);
  z.l = k + 1;
  z.e.resize((k + 1) * k, alpha);
  return z;
}

// Extreme points [q; v] of {Lq >= v 1, q >= 0, 1'q = 1}, found by solving
// every square subsystem with a dense LU.
inline std::vector<Vec> brute_vertices(const Loss& L) {
  const std::size_t k = L.k, l = L.l, dim = k + 1, rows = l + k;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rows, dim);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < k; ++j) h(i, j) = L(i, j);
    h(i, k) = -1.0;
  }
  for (std::size_t j = 0; j < k; ++j) h(l + j, j) = 1.0;

  std::vector<Vec> out;
  std::vector<bool> pick(rows, false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    Eigen::MatrixXd a(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    std::size_t r = 0;
    for (std::size_t i = 0; i < rows; ++i)
      if (pick[i]) a.row(r++) = h.row(i);
    a.row(k).setZero();
    a.row(k).head(k).setOnes();
    b(k) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < static_cast<Eigen::Index>(dim)) continue;
    Eigen::VectorXd x = lu.solve(b);
    if ((h * x).minCoeff() < -1e-9) continue;
    Vec p(x.data(), x.data() + dim);
    bool dup = false;
    for (const auto& o : out) {
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) d = std::max(d, std::abs(o[j] - p[j]));
      dup = dup || d <= 1e-9;
    }
    if (!dup) out.push_back(p);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

// max_q min_p p'Lq + f'q - f_y by scanning brute_vertices.
inline double game_by_vertices(const Loss& L, const Vec& f, int y) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : brute_vertices(L)) {
    double v = p[L.k];
    for (std::size_t j = 0; j < L.k; ++j) v += f[j] * p[j];
    best = std::max(best, v);
  }
  return best - f[y - 1];
}

// Families D of extreme points derived by hand for each closed form.
inline std::vector<Vec> family_zero_one(std::size_t k) {
  std::vector<Vec> out;
  for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
    Vec p(k + 1, 0.0);
    const double s = __builtin_popcountl(mask);
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1ul) p[i] = 1.0 / s;
    p[k] = (s - 1.0) / s;
    out.push_back(p);
  }
  return out;
}

inline std::vector<Vec> family_absolute(std::size_t k) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      Vec p(k + 1, 0.0);
      p[i] += 0.5;
      p[j] += 0.5;
      p[k] = (double(j) - double(i)) / 2.0;
      out.push_back(p);
    }
  return out;
}

inline std::vector<Vec> family_squared(std::size_t k) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < k; ++i) {
    Vec p(k + 1, 0.0);
    p[i] = 1.0;
    out.push_back(p);
  }
  const int K = static_cast<int>(k);
  for (int i = 1; i <= K; ++i)
    for (int l = i + 1; l <= K; ++l)
      for (int j = l; j <= K; ++j) {
        const double a = (2.0 * (j - l) + 1.0) / (2.0 * (j - i));
        const double b = (2.0 * (l - i) - 1.0) / (2.0 * (j - i));
        Vec p(k + 1, 0.0);
        p[i - 1] += a;
        p[j - 1] += b;
        p[k] = a * (l - i) * (l - i) + b * (j - l) * (j - l);
        out.push_back(p);
      }
  return out;
}

inline std::vector<Vec> family_abstain(std::size_t k, double alpha) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < k; ++i) {
    Vec p(k + 1, 0.0);
    p[i] = 1.0;
    out.push_back(p);
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      Vec m(k + 1, 0.0);
      m[i] += 1.0 - alpha;
      m[j] += alpha;
      m[k] = alpha;
      out.push_back(m);
    }
  }
  return out;
}

// Set equality up to tol, ignoring duplicates on either side.
inline bool same_point_set(const std::vector<Vec>& a, const std::vector<Vec>& b, double tol = 1e-9) {
  auto covered = [tol](const std::vector<Vec>& from, const std::vector<Vec>& in) {
    for (const auto& p : from) {
      bool hit = false;
      for (const auto& o : in) {
        double d = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) d = std::max(d, std::abs(o[j] - p[j]));
        hit = hit || d <= tol;
      }
      if (!hit) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

inline Vec random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace oracle
