#include "distlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "distlab/map_priors.hpp"

namespace distlab {
namespace {

const double kLogFloor = std::log(kProbFloor);

void check_temperature(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(what) + ": temperature must be positive and finite");
  }
}

void check_labels(const Matrix& logits, std::span<const int> labels, const char* what) {
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(logits.rows()) + " rows");
  }
  if (logits.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
  const auto k = static_cast<int>(logits.cols());
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw std::invalid_argument(std::string(what) + ": label " + std::to_string(y) +
                                  " out of range [0," + std::to_string(k) + ")");
    }
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape " + shape_string(a) + " vs " +
                                shape_string(b));
  }
}

void check_beta(double beta, const char* what) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument(std::string(what) + ": beta must be >= 0");
  }
}

// Writes log softmax(x / T) into `out` and returns nothing; `out` has x.size().
void log_softmax(std::span<const double> x, double t, std::span<double> out) {
  double mx = -INFINITY;
  for (double v : x) mx = std::max(mx, v / t);
  double s = 0.0;
  for (double v : x) s += std::exp(v / t - mx);
  const double lse = mx + std::log(s);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / t - lse;
}

double floored(double log_p) { return std::max(log_p, kLogFloor); }

}  // namespace

bool is_probability_vector(std::span<const double> values) {
  if (values.empty()) return false;
  double s = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= ProbVector::kSumTolerance;
}

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (!is_probability_vector(values_)) {
    throw std::invalid_argument("ProbVector: entries must be >= 0 and sum to 1");
  }
}

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

ProbVector softmax_t(std::span<const double> logits, double temperature) {
  check_temperature(temperature, "softmax_t");
  if (logits.empty()) throw std::invalid_argument("softmax_t: empty logits");
  std::vector<double> out(logits.size());
  log_softmax(logits, temperature, out);
  for (double& v : out) v = std::exp(v);
  return ProbVector(std::move(out));
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
  check_temperature(temperature, "softmax_rows");
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto out = p.row(i);
    log_softmax(logits.row(i), temperature, out);
    for (double& v : out) v = std::exp(v);
  }
  return p;
}

LossResult cce_loss(const Matrix& logits, std::span<const int> labels) {
  check_labels(logits, labels, "cce_loss");
  const std::size_t m = logits.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  LossResult r{0.0, Matrix(m, logits.cols())};
  std::vector<double> lp(logits.cols());
  for (std::size_t i = 0; i < m; ++i) {
    log_softmax(logits.row(i), 1.0, lp);
    const auto y = static_cast<std::size_t>(labels[i]);
    r.value -= floored(lp[y]);
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < lp.size(); ++c) g[c] = std::exp(lp[c]) * inv_m;
    g[y] -= inv_m;
  }
  r.value *= inv_m;
  return r;
}

LossResult distill_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                        double temperature, bool student_scaling) {
  check_temperature(temperature, "distill_loss");
  check_same_shape(student_logits, teacher_logits, "distill_loss");
  if (student_logits.rows() == 0) throw std::invalid_argument("distill_loss: empty batch");
  const std::size_t m = student_logits.rows();
  const std::size_t k = student_logits.cols();
  const double ts = student_scaling ? temperature : 1.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  LossResult r{0.0, Matrix(m, k)};
  std::vector<double> lt(k), ls(k);
  for (std::size_t i = 0; i < m; ++i) {
    log_softmax(teacher_logits.row(i), temperature, lt);
    log_softmax(student_logits.row(i), ts, ls);
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double t = std::exp(lt[c]);
      if (t > 0.0) r.value -= t * floored(ls[c]);
      g[c] = (std::exp(ls[c]) - t) / ts * inv_m;
    }
  }
  r.value *= inv_m;
  return r;
}

void validate_loss_spec(const LossSpec& spec) {
  check_temperature(spec.temperature, "LossSpec");
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw std::invalid_argument("LossSpec: alpha must be in [0,1]");
  }
  check_beta(spec.beta, "LossSpec");
}

LossResult combined_loss(const Matrix& student_logits, std::span<const int> labels,
                         const Matrix& teacher_logits, const LossSpec& spec) {
  validate_loss_spec(spec);
  auto hard = cce_loss(student_logits, labels);
  auto soft = distill_loss(student_logits, teacher_logits, spec.temperature, spec.student_scaling);
  const double a = spec.alpha;
  const double b = 1.0 - spec.alpha;
  LossResult r{a * hard.value + b * soft.value, Matrix(student_logits.rows(), student_logits.cols())};
  auto& g = r.gradient.data();
  const auto& gh = hard.gradient.data();
  const auto& gs = soft.gradient.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = a * gh[i] + b * gs[i];
  return r;
}

LossResult ls_loss(const Matrix& logits, std::span<const int> labels, double beta) {
  check_labels(logits, labels, "ls_loss");
  check_beta(beta, "ls_loss");
  const std::size_t m = logits.rows();
  const std::size_t k = logits.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double inv_k = 1.0 / static_cast<double>(k);
  LossResult r{0.0, Matrix(m, k)};
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < m; ++i) {
    log_softmax(logits.row(i), 1.0, lp);
    const auto y = static_cast<std::size_t>(labels[i]);
    double reg = 0.0;
    for (double v : lp) reg -= inv_k * floored(v);
    r.value += -floored(lp[y]) + beta * reg;
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(lp[c]);
      g[c] = ((p - (c == y ? 1.0 : 0.0)) + beta * (p - inv_k)) * inv_m;
    }
  }
  r.value *= inv_m;
  return r;
}

LossResult pu_loss(const Matrix& logits, std::span<const int> labels, double beta) {
  check_labels(logits, labels, "pu_loss");
  check_beta(beta, "pu_loss");
  const std::size_t m = logits.rows();
  const std::size_t k = logits.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  LossResult r{0.0, Matrix(m, k)};
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < m; ++i) {
    log_softmax(logits.row(i), 1.0, lp);
    const auto y = static_cast<std::size_t>(labels[i]);
    double neg_entropy = 0.0;
    for (double v : lp) neg_entropy += std::exp(v) * v;
    r.value += -floored(lp[y]) + beta * neg_entropy;
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(lp[c]);
      g[c] = ((p - (c == y ? 1.0 : 0.0)) + beta * p * (lp[c] - neg_entropy)) * inv_m;
    }
  }
  r.value *= inv_m;
  return r;
}

LossResult weighted_sd_loss(const Matrix& student_logits, std::span<const int> labels,
                            const Matrix& teacher_logits, double beta, double temperature) {
  check_labels(student_logits, labels, "weighted_sd_loss");
  check_same_shape(student_logits, teacher_logits, "weighted_sd_loss");
  check_temperature(temperature, "weighted_sd_loss");
  check_beta(beta, "weighted_sd_loss");
  const std::size_t m = student_logits.rows();
  const std::size_t k = student_logits.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  LossResult r{0.0, Matrix(m, k)};
  std::vector<double> lt(k), ls(k);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = beta * omega(teacher_logits.row(i), temperature);
    log_softmax(teacher_logits.row(i), temperature, lt);
    log_softmax(student_logits.row(i), 1.0, ls);
    const auto y = static_cast<std::size_t>(labels[i]);
    double distill = 0.0;
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double t = std::exp(lt[c]);
      const double p = std::exp(ls[c]);
      if (t > 0.0) distill -= t * floored(ls[c]);
      g[c] = ((p - (c == y ? 1.0 : 0.0)) + w * (p - t)) * inv_m;
    }
    r.value += -floored(ls[y]) + w * distill;
  }
  r.value *= inv_m;
  return r;
}

LossResult soft_target_ce(const Matrix& logits, const Matrix& targets) {
  check_same_shape(logits, targets, "soft_target_ce");
  if (logits.rows() == 0) throw std::invalid_argument("soft_target_ce: empty batch");
  const std::size_t m = logits.rows();
  const std::size_t k = logits.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  LossResult r{0.0, Matrix(m, k)};
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = targets.row(i);
    if (!is_probability_vector(t)) {
      throw std::invalid_argument("soft_target_ce: target row " + std::to_string(i) +
                                  " is not a probability vector");
    }
    log_softmax(logits.row(i), 1.0, lp);
    auto g = r.gradient.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (t[c] > 0.0) r.value -= t[c] * floored(lp[c]);
      g[c] = (std::exp(lp[c]) - t[c]) * inv_m;
    }
  }
  r.value *= inv_m;
  return r;
}

LossResult evaluate_loss(const LossSpec& spec, const Matrix& student_logits,
                         std::span<const int> labels, const Matrix& teacher_logits) {
  switch (spec.kind) {
    case LossKind::kCce:
      return cce_loss(student_logits, labels);
    case LossKind::kDistill:
      return distill_loss(student_logits, teacher_logits, spec.temperature, spec.student_scaling);
    case LossKind::kCombined:
      return combined_loss(student_logits, labels, teacher_logits, spec);
    case LossKind::kLabelSmooth:
      return ls_loss(student_logits, labels, spec.beta);
    case LossKind::kPredUncertainty:
      return pu_loss(student_logits, labels, spec.beta);
    case LossKind::kWeightedSd:
      return weighted_sd_loss(student_logits, labels, teacher_logits, spec.beta, spec.temperature);
  }
  throw std::invalid_argument("evaluate_loss: unknown loss kind");
}

}  // namespace distlab
