#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "distlab/matrix.hpp"
#include "distlab/nn.hpp"

namespace distlab {

// Soft-target builders. Every builder returns an m x k matrix whose rows are
// probability vectors, ready for soft_target_ce.

// 1 - epsilon on the true class, epsilon / (k - 1) elsewhere.
Matrix ls_targets(std::span<const int> labels, double epsilon, std::size_t k);

// alpha * onehot(y) + (1 - alpha) * targets, row by row.
Matrix mix_with_one_hot(const Matrix& targets, std::span<const int> labels, double alpha);

// Exponential moving average of model parameters (mean teacher).
class EmaState {
 public:
  // decay must lie in [0, 1).
  EmaState(MlpModel initial, double decay);

  const MlpModel& shadow() const { return shadow_; }
  double decay() const { return decay_; }
  // Number of updates applied so far.
  std::uint64_t updates() const { return updates_; }

  // shadow <- decay * shadow + (1 - decay) * model.
  void update(const MlpModel& model);

 private:
  MlpModel shadow_;
  double decay_;
  std::uint64_t updates_ = 0;
};

// Max softmax probability of the shadow model for each row of the batch.
std::vector<double> ema_confidences(const EmaState& state, const Batch& batch);

// Same quantity for an arbitrary model (used during EMA warm-up).
std::vector<double> max_confidences(const MlpModel& model, const Matrix& features);

// Softmax of the shadow model's logits, T = 1.
Matrix ema_self_targets(const EmaState& state, const Batch& batch);

struct BetaSmoothingConfig {
  double a = 1.0;           // Beta(a, 1) shape
  double alpha_mix = 0.4;   // hard-label weight the Beta targets are mixed with
  double g = 0.85;          // intended mean ground-truth mass after mixing
  bool use_ema_ranking = true;
  std::uint64_t rng_seed = 0;
};

// a such that alpha_mix + (1 - alpha_mix) * a / (a + 1) = g.
double solve_beta_a(double g, double alpha_mix);

// Per-batch Beta smoothing. m iid draws from Beta(a, 1) are sorted and paired
// with samples in ascending confidence order (ties by batch.indices), or by a
// seeded random permutation when use_ema_ranking is false. The sample paired
// with b gets b on its true class and (1 - b) / (k - 1) elsewhere.
Matrix beta_targets(const Batch& batch, std::span<const double> confidences,
                    const BetaSmoothingConfig& cfg, std::size_t k);

// The Beta draws paired with each row of the batch (the true-class mass of
// beta_targets), exposed for diagnostics.
std::vector<double> beta_assignments(const Batch& batch, std::span<const double> confidences,
                                     const BetaSmoothingConfig& cfg);

// Keep the ceil(keep_fraction * k) largest teacher logits per row (ties keep
// the lower class index), softmax over them at temperature T, zero elsewhere.
Matrix pruned_teacher_targets(const Matrix& teacher_logits, double temperature,
                              double keep_fraction);

std::size_t kept_class_count(double keep_fraction, std::size_t k);

// MAP targets under alpha_x = beta * exp(f / T) + gamma with a one-hot count.
// Entries whose mode coordinate would be negative are pruned to zero.
Matrix dirichlet_map_targets(const Matrix& teacher_logits, std::span<const int> labels,
                             double beta, double temperature, double gamma);

}  // namespace distlab
