#include "distlab/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "distlab/losses.hpp"
#include "distlab/map_priors.hpp"

namespace distlab {
namespace {

void check_k(std::size_t k, const char* what) {
  if (k < 2) throw std::invalid_argument(std::string(what) + ": need k >= 2");
}

void check_label_range(std::span<const int> labels, std::size_t k, const char* what) {
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::invalid_argument(std::string(what) + ": label " + std::to_string(y) +
                                  " out of range");
    }
  }
}

void blend(MlpModel& shadow, const MlpModel& model, double decay) {
  for (std::size_t l = 0; l < shadow.num_layers(); ++l) {
    auto& sw = shadow.weights[l].data();
    const auto& mw = model.weights[l].data();
    for (std::size_t i = 0; i < sw.size(); ++i) sw[i] = decay * sw[i] + (1.0 - decay) * mw[i];
    auto& sb = shadow.biases[l];
    const auto& mb = model.biases[l];
    for (std::size_t i = 0; i < sb.size(); ++i) sb[i] = decay * sb[i] + (1.0 - decay) * mb[i];
  }
}

}  // namespace

Matrix ls_targets(std::span<const int> labels, double epsilon, std::size_t k) {
  check_k(k, "ls_targets");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("ls_targets: epsilon must be in [0,1)");
  }
  check_label_range(labels, k, "ls_targets");
  const double off = epsilon / static_cast<double>(k - 1);
  Matrix t(labels.size(), k, off);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t(i, static_cast<std::size_t>(labels[i])) = 1.0 - epsilon;
  }
  return t;
}

Matrix mix_with_one_hot(const Matrix& targets, std::span<const int> labels, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("mix_with_one_hot: alpha must be in [0,1]");
  }
  if (labels.size() != targets.rows()) {
    throw std::invalid_argument("mix_with_one_hot: label count mismatch");
  }
  check_label_range(labels, targets.cols(), "mix_with_one_hot");
  Matrix out = targets;
  for (double& v : out.data()) v *= 1.0 - alpha;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out(i, static_cast<std::size_t>(labels[i])) += alpha;
  }
  return out;
}

EmaState::EmaState(MlpModel initial, double decay) : shadow_(std::move(initial)), decay_(decay) {
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw std::invalid_argument("EmaState: decay must be in [0,1)");
  }
}

void EmaState::update(const MlpModel& model) {
  if (model.layer_dims != shadow_.layer_dims) {
    throw std::invalid_argument("EmaState::update: model shape differs from shadow");
  }
  blend(shadow_, model, decay_);
  ++updates_;
}

std::vector<double> max_confidences(const MlpModel& model, const Matrix& features) {
  const Matrix p = softmax_rows(forward(model, features));
  std::vector<double> conf(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const auto r = p.row(i);
    conf[i] = *std::max_element(r.begin(), r.end());
  }
  return conf;
}

std::vector<double> ema_confidences(const EmaState& state, const Batch& batch) {
  validate_batch(batch);
  return max_confidences(state.shadow(), batch.features);
}

Matrix ema_self_targets(const EmaState& state, const Batch& batch) {
  validate_batch(batch);
  return softmax_rows(forward(state.shadow(), batch.features));
}

double solve_beta_a(double g, double alpha_mix) {
  if (!(alpha_mix >= 0.0 && alpha_mix < 1.0)) {
    throw std::invalid_argument("solve_beta_a: alpha_mix must be in [0,1)");
  }
  if (!(g > alpha_mix && g < 1.0)) {
    throw std::invalid_argument("solve_beta_a: g must lie in (alpha_mix, 1)");
  }
  const double r = (g - alpha_mix) / (1.0 - alpha_mix);
  return r / (1.0 - r);
}

std::vector<double> beta_assignments(const Batch& batch, std::span<const double> confidences,
                                     const BetaSmoothingConfig& cfg) {
  validate_batch(batch);
  const std::size_t m = batch.size();
  if (confidences.size() != m) {
    throw std::invalid_argument("beta_targets: confidences length differs from batch size");
  }
  if (!(cfg.a > 0.0)) throw std::invalid_argument("beta_targets: a must be positive");

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> draws(m);
  // Beta(a, 1) has CDF x^a.
  for (double& b : draws) b = std::pow(unif(rng), 1.0 / cfg.a);
  std::sort(draws.begin(), draws.end());

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (cfg.use_ema_ranking) {
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      if (confidences[i] != confidences[j]) return confidences[i] < confidences[j];
      return batch.indices[i] < batch.indices[j];
    });
  } else {
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<double> assigned(m);
  for (std::size_t r = 0; r < m; ++r) assigned[order[r]] = draws[r];
  return assigned;
}

Matrix beta_targets(const Batch& batch, std::span<const double> confidences,
                    const BetaSmoothingConfig& cfg, std::size_t k) {
  check_k(k, "beta_targets");
  check_label_range(batch.labels, k, "beta_targets");
  const auto b = beta_assignments(batch, confidences, cfg);
  Matrix t(batch.size(), k);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double off = (1.0 - b[i]) / static_cast<double>(k - 1);
    auto row = t.row(i);
    std::fill(row.begin(), row.end(), off);
    row[static_cast<std::size_t>(batch.labels[i])] = b[i];
  }
  return t;
}

std::size_t kept_class_count(double keep_fraction, std::size_t k) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("pruned_teacher_targets: keep_fraction must be in (0,1]");
  }
  // The small slack keeps products like 0.3 * 10 from rounding up to 4.
  const double raw = keep_fraction * static_cast<double>(k);
  const auto kept = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(kept, 1, k);
}

Matrix pruned_teacher_targets(const Matrix& teacher_logits, double temperature,
                              double keep_fraction) {
  const std::size_t k = teacher_logits.cols();
  const std::size_t keep = kept_class_count(keep_fraction, k);
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("pruned_teacher_targets: temperature must be positive");
  }
  Matrix t(teacher_logits.rows(), k);
  std::vector<std::size_t> order(k);
  std::vector<double> kept(keep);
  for (std::size_t i = 0; i < teacher_logits.rows(); ++i) {
    const auto f = teacher_logits.row(i);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    for (std::size_t j = 0; j < keep; ++j) kept[j] = f[order[j]];
    const auto p = softmax_t(kept, temperature);
    for (std::size_t j = 0; j < keep; ++j) t(i, order[j]) = p[j];
  }
  return t;
}

Matrix dirichlet_map_targets(const Matrix& teacher_logits, std::span<const int> labels,
                             double beta, double temperature, double gamma) {
  if (labels.size() != teacher_logits.rows()) {
    throw std::invalid_argument("dirichlet_map_targets: label count mismatch");
  }
  const std::size_t k = teacher_logits.cols();
  check_label_range(labels, k, "dirichlet_map_targets");
  Matrix t(teacher_logits.rows(), k);
  for (std::size_t i = 0; i < teacher_logits.rows(); ++i) {
    const auto alpha = raw_alpha(teacher_logits.row(i), beta, temperature, gamma);
    const auto z = pruned_dirichlet_map(
        CountVector::one_hot(k, static_cast<std::size_t>(labels[i])), alpha);
    std::copy(z.begin(), z.end(), t.row(i).begin());
  }
  return t;
}

}  // namespace distlab
