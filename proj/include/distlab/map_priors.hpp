#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "distlab/losses.hpp"

namespace distlab {

// Dirichlet concentration; every entry strictly positive.
class DirichletPrior {
 public:
  explicit DirichletPrior(std::vector<double> alpha);
  std::span<const double> alpha() const { return alpha_; }
  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }

 private:
  std::vector<double> alpha_;
};

// Category counts; entries >= 0 with a positive total.
class CountVector {
 public:
  explicit CountVector(std::vector<std::int64_t> counts);
  static CountVector one_hot(std::size_t k, std::size_t label);
  std::span<const std::int64_t> counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }

 private:
  std::vector<std::int64_t> counts_;
};

// Raised when c_i + alpha_i < 1 for some i, i.e. the posterior mode lies on
// the simplex boundary and the closed form does not apply.
class NonInteriorMapError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// z_i = (c_i + alpha_i - 1) / sum_j (c_j + alpha_j - 1).
ProbVector dirichlet_map(const CountVector& counts, const DirichletPrior& prior);

// Like dirichlet_map, but entries with c_i + alpha_i - 1 < 0 are pruned to
// exactly zero before normalizing. `pruned` (optional) receives the count.
ProbVector pruned_dirichlet_map(const CountVector& counts, std::span<const double> alpha,
                                std::size_t* pruned = nullptr);

// alpha_i = beta * exp(f_i / T) + gamma. Throws std::domain_error if any entry
// is not strictly positive and finite.
DirichletPrior build_alpha(std::span<const double> teacher_logits, double beta, double temperature,
                           double gamma = 1.0);

// Unchecked variant of build_alpha: returns the raw entries, which may be <= 0.
std::vector<double> raw_alpha(std::span<const double> teacher_logits, double beta,
                              double temperature, double gamma);

ProbVector normalize_alpha(const DirichletPrior& prior);

// omega = sum_j exp(f_j / T), via log-sum-exp. Throws std::overflow_error if
// the result is not representable.
double omega(std::span<const double> teacher_logits, double temperature);

// Principal branch W0 of the Lambert W function, x >= -1/e.
double lambert_w(double x);

// Minimizer of -log z_0 + beta * sum_c z_c log z_c over the k-simplex
// (true class at index 0).
ProbVector pu_optimum(double beta, std::size_t k);

// Minimizer of -log z_0 + beta * sum_c -(1/k) log z_c over the k-simplex.
ProbVector ls_optimum(double beta, std::size_t k);

}  // namespace distlab
