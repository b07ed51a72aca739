#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "distlab/matrix.hpp"

namespace distlab {

// A point on the probability simplex: entries >= 0 summing to 1 within 1e-9.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Throws std::invalid_argument if `values` is not on the simplex.
  explicit ProbVector(std::vector<double> values);
  ProbVector(std::initializer_list<double> values) : ProbVector(std::vector<double>(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

 private:
  std::vector<double> values_;
};

// True iff every entry is finite and >= 0 and the sum is within 1e-9 of 1.
bool is_probability_vector(std::span<const double> values);

// log is floored at log(1e-300) so exact zeros never produce -inf.
inline constexpr double kProbFloor = 1e-300;
double safe_log(double p);

ProbVector softmax_t(std::span<const double> logits, double temperature = 1.0);
// Row-wise softmax of logits / temperature.
Matrix softmax_rows(const Matrix& logits, double temperature = 1.0);

// Every loss reports the batch mean and its gradient w.r.t. the student logits.
struct LossResult {
  double value = 0.0;
  Matrix gradient;
};

LossResult cce_loss(const Matrix& logits, std::span<const int> labels);

// Cross-entropy of student predictions against tempered teacher predictions.
// The student is tempered by the same T only when `student_scaling` is set.
LossResult distill_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                        double temperature, bool student_scaling = false);

enum class LossKind { kCce, kDistill, kCombined, kLabelSmooth, kPredUncertainty, kWeightedSd };

struct LossSpec {
  LossKind kind = LossKind::kCce;
  double alpha = 1.0;        // weight of the hard-label term in the combined loss
  double temperature = 1.0;  // teacher temperature
  double beta = 0.0;         // regularizer strength (label smoothing, uncertainty, weighted SD)
  bool student_scaling = false;
};

void validate_loss_spec(const LossSpec& spec);

// alpha * cce + (1 - alpha) * distill.
LossResult combined_loss(const Matrix& student_logits, std::span<const int> labels,
                         const Matrix& teacher_logits, const LossSpec& spec);

// Per sample: -log z_y + beta * sum_c -(1/k) log z_c.
LossResult ls_loss(const Matrix& logits, std::span<const int> labels, double beta);

// Per sample: -log z_y + beta * sum_c z_c log z_c (negative-entropy penalty).
LossResult pu_loss(const Matrix& logits, std::span<const int> labels, double beta);

// Per sample: -log z_y + beta * omega_i * sum_c -t_ic log z_c, where t_i is the
// tempered teacher prediction and omega_i = sum_j exp(f_ij / T).
LossResult weighted_sd_loss(const Matrix& student_logits, std::span<const int> labels,
                            const Matrix& teacher_logits, double beta, double temperature);

// Per sample: -sum_c t_ic log z_c against explicit soft targets (rows of `targets`).
// Terms with t_ic == 0 contribute nothing.
LossResult soft_target_ce(const Matrix& logits, const Matrix& targets);

// Dispatch on spec.kind. `teacher_logits` may be empty for label-only kinds.
LossResult evaluate_loss(const LossSpec& spec, const Matrix& student_logits,
                         std::span<const int> labels, const Matrix& teacher_logits);

}  // namespace distlab
