#include "distlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "distlab/losses.hpp"

namespace distlab {
namespace {

void check_inputs(const Matrix& probs, std::span<const int> labels, const char* what) {
  if (probs.rows() == 0) throw std::invalid_argument(std::string(what) + ": no samples");
  if (labels.size() != probs.rows()) {
    throw std::invalid_argument(std::string(what) + ": label count mismatch");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw std::invalid_argument(std::string(what) + ": label out of range");
    }
  }
}

}  // namespace

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double accuracy(const Matrix& probs, std::span<const int> labels) {
  check_inputs(probs, labels, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    if (argmax(probs.row(i)) == static_cast<std::size_t>(labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probs.rows());
}

double nll(const Matrix& probs, std::span<const int> labels) {
  check_inputs(probs, labels, "nll");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    s -= safe_log(probs(i, static_cast<std::size_t>(labels[i])));
  }
  return s / static_cast<double>(probs.rows());
}

double avg_predictive_uncertainty(const Matrix& probs) {
  if (probs.rows() == 0) throw std::invalid_argument("avg_predictive_uncertainty: no samples");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (double p : probs.row(i)) {
      if (p > 0.0) s -= p * std::log(p);
    }
  }
  return s / static_cast<double>(probs.rows());
}

std::vector<double> true_class_confidences(const Matrix& probs, std::span<const int> labels) {
  check_inputs(probs, labels, "true_class_confidences");
  std::vector<double> c(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    c[i] = probs(i, static_cast<std::size_t>(labels[i]));
  }
  return c;
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number series: -1/(12x^2) + 1/(120x^4) - 1/(252x^6) + 1/(240x^8) - 1/(132x^10)
  const double series =
      inv2 * (-1.0 / 12.0 +
              inv2 * (1.0 / 120.0 +
                      inv2 * (-1.0 / 252.0 + inv2 * (1.0 / 240.0 + inv2 * (-1.0 / 132.0)))));
  return result + std::log(x) - 0.5 * inv + series;
}

KnnEntropy knn_entropy_1d_detail(std::span<const double> samples, std::size_t k_nn) {
  const std::size_t n = samples.size();
  if (k_nn < 1) throw std::invalid_argument("knn_entropy_1d: k_nn must be >= 1");
  if (n <= k_nn) {
    throw std::invalid_argument("knn_entropy_1d: need more than k_nn = " + std::to_string(k_nn) +
                                " samples, got " + std::to_string(n));
  }
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());

  double log_sum = 0.0;
  std::size_t floored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // Merge outward from i; the k-th step yields the k-th neighbour distance.
    std::size_t lo = i;      // next left candidate is lo - 1
    std::size_t hi = i + 1;  // next right candidate is hi
    double eps = 0.0;
    for (std::size_t step = 0; step < k_nn; ++step) {
      const double dl = lo > 0 ? s[i] - s[lo - 1] : std::numeric_limits<double>::infinity();
      const double dr = hi < n ? s[hi] - s[i] : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        eps = dl;
        --lo;
      } else {
        eps = dr;
        ++hi;
      }
    }
    if (eps < kKnnDistanceFloor) {
      eps = kKnnDistanceFloor;
      ++floored;
    }
    log_sum += std::log(2.0 * eps);
  }
  const double nd = static_cast<double>(n);
  return {digamma(nd) - digamma(static_cast<double>(k_nn)) + log_sum / nd,
          static_cast<double>(floored) / nd};
}

double knn_entropy_1d(std::span<const double> samples, std::size_t k_nn) {
  return knn_entropy_1d_detail(samples, k_nn).entropy;
}

KnnEntropy confidence_diversity_detail(const Matrix& probs, std::span<const int> labels,
                                       std::size_t k_nn) {
  return knn_entropy_1d_detail(true_class_confidences(probs, labels), k_nn);
}

double confidence_diversity(const Matrix& probs, std::span<const int> labels, std::size_t k_nn) {
  return confidence_diversity_detail(probs, labels, k_nn).entropy;
}

std::size_t CalibrationBins::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t calibration_bin(double confidence, std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("calibration_bin: n_bins must be >= 1");
  const double scaled = std::ceil(confidence * static_cast<double>(n_bins));
  if (!(scaled > 1.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled) - 1, n_bins - 1);
}

CalibrationBins calibration_bins(const Matrix& probs, std::span<const int> labels,
                                 std::size_t n_bins) {
  check_inputs(probs, labels, "ece");
  if (n_bins < 1) throw std::invalid_argument("ece: n_bins must be >= 1");
  CalibrationBins bins;
  bins.n_bins = n_bins;
  bins.counts.assign(n_bins, 0);
  bins.confidence_sum.assign(n_bins, 0.0);
  bins.correct_sum.assign(n_bins, 0.0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    const std::size_t pred = argmax(row);
    const std::size_t b = calibration_bin(row[pred], n_bins);
    ++bins.counts[b];
    bins.confidence_sum[b] += row[pred];
    if (pred == static_cast<std::size_t>(labels[i])) bins.correct_sum[b] += 1.0;
  }
  return bins;
}

double ece(const Matrix& probs, std::span<const int> labels, std::size_t n_bins) {
  const auto bins = calibration_bins(probs, labels, n_bins);
  const double m = static_cast<double>(probs.rows());
  double e = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins.counts[b] == 0) continue;
    const double nb = static_cast<double>(bins.counts[b]);
    e += (nb / m) * std::abs(bins.correct_sum[b] / nb - bins.confidence_sum[b] / nb);
  }
  return e;
}

MetricsRecord evaluate_predictions(const Matrix& probs, std::span<const int> labels,
                                   const MetricsOptions& options) {
  MetricsRecord r;
  r.n_samples = probs.rows();
  r.accuracy = accuracy(probs, labels);
  r.nll = nll(probs, labels);
  r.avg_pred_uncertainty = avg_predictive_uncertainty(probs);
  if (probs.rows() > options.knn_k) {
    const auto cd = confidence_diversity_detail(probs, labels, options.knn_k);
    r.confidence_diversity = cd.entropy;
    r.degenerate_fraction = cd.degenerate_fraction;
  } else {
    // Too few samples for the estimator.
    r.confidence_diversity = std::numeric_limits<double>::quiet_NaN();
    r.degenerate_fraction = 1.0;
  }
  r.ece = ece(probs, labels, options.ece_bins);
  return r;
}

}  // namespace distlab
