#pragma once

// Independent reference implementations used as test oracles. Nothing in here
// calls into the library except for the plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "distlab/matrix.hpp"
#include "distlab/nn.hpp"

namespace oracle {

using distlab::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

inline std::vector<int> random_labels(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, static_cast<int>(k) - 1);
  std::vector<int> y(m);
  for (int& v : y) v = u(rng);
  return y;
}

// Straight triple loop, ReLU between layers.
inline Matrix naive_forward(const distlab::MlpModel& model, const Matrix& x) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> a(x.row(i).begin(), x.row(i).end());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      const Matrix& w = model.weights[l];
      std::vector<double> z(w.rows());
      for (std::size_t o = 0; o < w.rows(); ++o) {
        double s = model.biases[l][o];
        for (std::size_t j = 0; j < w.cols(); ++j) s += w(o, j) * a[j];
        const bool last = l + 1 == model.weights.size();
        z[o] = last ? s : std::max(0.0, s);
      }
      a = z;
    }
    rows.push_back(a);
  }
  Matrix out(x.rows(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

// Central differences of f at x (x is modified in place and restored).
inline std::vector<double> numeric_gradient(const std::function<double()>& f,
                                            std::vector<double*> params, double h = 1e-5) {
  std::vector<double> g;
  for (double* p : params) {
    const double keep = *p;
    *p = keep + h;
    const double up = f();
    *p = keep - h;
    const double down = f();
    *p = keep;
    g.push_back((up - down) / (2 * h));
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||, tiny)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(d) / denom;
}

inline std::vector<double*> pointers(Matrix& m) {
  std::vector<double*> p;
  for (double& v : m.data()) p.push_back(&v);
  return p;
}

// Plain softmax, no max shift tricks beyond the usual one.
inline std::vector<double> softmax(const std::vector<double>& z, double t = 1.0) {
  double mx = -INFINITY;
  for (double v : z) mx = std::max(mx, v / t);
  std::vector<double> p(z.size());
  double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] / t - mx));
  for (double& v : p) v /= s;
  return p;
}

// Euclidean projection onto {z : z_i >= lo, sum z = 1}, by sorting.
inline std::vector<double> project_simplex(const std::vector<double>& v, double lo = 0.0) {
  const std::size_t k = v.size();
  const double mass = 1.0 - lo * static_cast<double>(k);
  std::vector<double> u(k);
  for (std::size_t i = 0; i < k; ++i) u[i] = v[i] - lo;
  std::vector<double> s = u;
  std::sort(s.rbegin(), s.rend());
  double cum = 0, theta = 0;
  for (std::size_t j = 0; j < k; ++j) {
    cum += s[j];
    const double t = (cum - mass) / static_cast<double>(j + 1);
    if (s[j] - t > 0) theta = t;
  }
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = std::max(u[i] - theta, 0.0) + lo;
  return out;
}

// Projected gradient ascent with backtracking on sum_i w_i log z_i, w_i > 0.
inline std::vector<double> simplex_log_maximizer(const std::vector<double>& w) {
  const std::size_t k = w.size();
  const auto obj = [&](const std::vector<double>& z) {
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += w[i] * std::log(z[i]);
    return s;
  };
  const double lo = 1e-12;
  std::vector<double> z(k, 1.0 / static_cast<double>(k));
  double step = 1e-2;
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = w[i] / z[i];
    const double f0 = obj(z);
    std::vector<double> next;
    for (;;) {
      std::vector<double> y(k);
      for (std::size_t i = 0; i < k; ++i) y[i] = z[i] + step * g[i];
      next = project_simplex(y, lo);
      if (obj(next) >= f0 || step < 1e-18) break;
      step *= 0.5;
    }
    double moved = 0;
    for (std::size_t i = 0; i < k; ++i) moved = std::max(moved, std::abs(next[i] - z[i]));
    z = next;
    step *= 1.5;
    if (moved < 1e-15) break;
  }
  return z;
}

// Golden-section minimum of a unimodal f on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-13) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Single-sample objectives with the true class at index 0, written out
// directly from their definitions.
inline double pu_objective(const std::vector<double>& z, double beta) {
  double s = -std::log(z[0]);
  for (double v : z) s += beta * v * std::log(v);
  return s;
}

inline double ls_objective(const std::vector<double>& z, double beta) {
  const double k = static_cast<double>(z.size());
  double s = -std::log(z[0]);
  for (double v : z) s -= beta / k * std::log(v);
  return s;
}

// Minimizer over the simplex restricted to the symmetric family
// (a, (1-a)/(k-1), ...). Both objectives are convex and symmetric in the
// off-class coordinates, so the global minimizer lies in this family.
inline double symmetric_min(const std::function<double(const std::vector<double>&)>& f,
                            std::size_t k) {
  const auto g = [&](double a) {
    std::vector<double> z(k, (1 - a) / static_cast<double>(k - 1));
    z[0] = a;
    return f(z);
  };
  return golden_min(g, 1e-15, 1 - 1e-15);
}

// Mirror descent on the full simplex, for small k cross-checks.
inline std::vector<double> simplex_min_md(
    const std::function<double(const std::vector<double>&)>& f, std::size_t k, int iters = 20000) {
  std::vector<double> z(k, 1.0 / static_cast<double>(k));
  const double h = 1e-7;
  double eta = 0.5;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) {
      auto up = z, dn = z;
      up[i] += h;
      dn[i] -= h;
      g[i] = (f(up) - f(dn)) / (2 * h);
    }
    std::vector<double> next(k);
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += (next[i] = z[i] * std::exp(-eta * g[i]));
    for (double& v : next) v /= s;
    if (f(next) > f(z)) {
      eta *= 0.5;
      continue;
    }
    z = next;
  }
  return z;
}

// Spearman rank correlation; inputs assumed tie-free.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1) / 2;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  return num / std::sqrt(da * db);
}

// Newton on w e^w = x, for x > 0.
inline double lambert_newton(double x) {
  double w = std::log1p(x);
  for (int i = 0; i < 100; ++i) {
    const double e = std::exp(w);
    const double step = (w * e - x) / (e * (w + 1));
    w -= step;
    if (std::abs(step) < 1e-17) break;
  }
  return w;
}

}  // namespace oracle
