#include "distlab/map_priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace distlab {
namespace {

void check_temperature(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(what) + ": temperature must be positive and finite");
  }
}

double log_sum_exp(std::span<const double> x, double t) {
  double mx = -INFINITY;
  for (double v : x) mx = std::max(mx, v / t);
  double s = 0.0;
  for (double v : x) s += std::exp(v / t - mx);
  return mx + std::log(s);
}

}  // namespace

DirichletPrior::DirichletPrior(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw std::invalid_argument("DirichletPrior: empty concentration");
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("DirichletPrior: concentrations must be positive and finite");
    }
  }
}

CountVector::CountVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  std::int64_t total = 0;
  for (auto c : counts_) {
    if (c < 0) throw std::invalid_argument("CountVector: negative count");
    total += c;
  }
  if (total < 1) throw std::invalid_argument("CountVector: counts must sum to at least 1");
}

CountVector CountVector::one_hot(std::size_t k, std::size_t label) {
  if (label >= k) throw std::invalid_argument("CountVector::one_hot: label out of range");
  std::vector<std::int64_t> c(k, 0);
  c[label] = 1;
  return CountVector(std::move(c));
}

ProbVector dirichlet_map(const CountVector& counts, const DirichletPrior& prior) {
  if (counts.size() != prior.size()) {
    throw std::invalid_argument("dirichlet_map: counts and prior have different lengths");
  }
  std::vector<double> z(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<double>(counts.counts()[i]) + prior[i] - 1.0;
    if (z[i] < 0.0) {
      throw NonInteriorMapError("dirichlet_map: c_" + std::to_string(i) + " + alpha_" +
                                std::to_string(i) + " < 1; the mode is not interior");
    }
    total += z[i];
  }
  if (!(total > 0.0)) throw NonInteriorMapError("dirichlet_map: zero normalizer");
  for (double& v : z) v /= total;
  return ProbVector(std::move(z));
}

ProbVector pruned_dirichlet_map(const CountVector& counts, std::span<const double> alpha,
                                std::size_t* pruned) {
  if (counts.size() != alpha.size()) {
    throw std::invalid_argument("pruned_dirichlet_map: length mismatch");
  }
  std::vector<double> z(counts.size());
  double total = 0.0;
  std::size_t n_pruned = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<double>(counts.counts()[i]) + alpha[i] - 1.0;
    if (z[i] < 0.0) {
      z[i] = 0.0;
      ++n_pruned;
    }
    total += z[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NonInteriorMapError("pruned_dirichlet_map: no mass left after pruning");
  }
  for (double& v : z) v /= total;
  if (pruned != nullptr) *pruned = n_pruned;
  return ProbVector(std::move(z));
}

std::vector<double> raw_alpha(std::span<const double> teacher_logits, double beta,
                              double temperature, double gamma) {
  check_temperature(temperature, "build_alpha");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("build_alpha: beta must be positive");
  }
  std::vector<double> a(teacher_logits.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = beta * std::exp(teacher_logits[i] / temperature) + gamma;
  }
  return a;
}

DirichletPrior build_alpha(std::span<const double> teacher_logits, double beta, double temperature,
                           double gamma) {
  auto a = raw_alpha(teacher_logits, beta, temperature, gamma);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
      throw std::domain_error("build_alpha: alpha_" + std::to_string(i) +
                              " is not positive and finite");
    }
  }
  return DirichletPrior(std::move(a));
}

ProbVector normalize_alpha(const DirichletPrior& prior) {
  double total = 0.0;
  for (double a : prior.alpha()) total += a;
  std::vector<double> out(prior.alpha().begin(), prior.alpha().end());
  for (double& v : out) v /= total;
  return ProbVector(std::move(out));
}

double omega(std::span<const double> teacher_logits, double temperature) {
  check_temperature(temperature, "omega");
  if (teacher_logits.empty()) throw std::invalid_argument("omega: empty logits");
  const double lse = log_sum_exp(teacher_logits, temperature);
  if (!(lse < std::log(std::numeric_limits<double>::max()))) {
    throw std::overflow_error("omega: log-sum-exp " + std::to_string(lse) +
                              " exceeds double range");
  }
  return std::exp(lse);
}

double lambert_w(double x) {
  constexpr double kBranchPoint = -1.0 / std::numbers::e;
  if (std::isnan(x) || x < kBranchPoint) {
    throw std::domain_error("lambert_w: argument below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (x == kBranchPoint) return -1.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.25) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x <= std::numbers::e) {
    w = std::log1p(x);
    if (x < 1.0) w *= 1.0 - 0.25 * w;
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  // Halley's method on g(w) = w - x e^{-w}, which stays finite for large x.
  for (int iter = 0; iter < 64; ++iter) {
    const double xe = x * std::exp(-w);
    const double g = w - xe;
    const double g1 = 1.0 + xe;
    const double g2 = -xe;
    const double step = g / (g1 - 0.5 * g * g2 / g1);
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) {
      break;
    }
  }
  return w;
}

ProbVector pu_optimum(double beta, std::size_t k) {
  if (!(beta > 0.0)) throw std::invalid_argument("pu_optimum: beta must be positive");
  if (k < 2) throw std::invalid_argument("pu_optimum: need k >= 2");
  // W argument exp(-1/beta) (k-1) / beta, formed in log space.
  const double log_arg = -1.0 / beta + std::log(static_cast<double>(k - 1)) - std::log(beta);
  const double w = lambert_w(std::exp(log_arg));
  const double zy = 1.0 / (beta * w + 1.0);
  std::vector<double> z(k, (1.0 - zy) / static_cast<double>(k - 1));
  z[0] = zy;
  return ProbVector(std::move(z));
}

ProbVector ls_optimum(double beta, std::size_t k) {
  if (!(beta >= 0.0)) throw std::invalid_argument("ls_optimum: beta must be >= 0");
  if (k < 2) throw std::invalid_argument("ls_optimum: need k >= 2");
  const double kd = static_cast<double>(k);
  std::vector<double> z(k, beta / (kd * (1.0 + beta)));
  z[0] = (kd + beta) / (kd * (1.0 + beta));
  return ProbVector(std::move(z));
}

}  // namespace distlab
