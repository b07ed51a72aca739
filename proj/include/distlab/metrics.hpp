#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "distlab/matrix.hpp"

namespace distlab {

struct MetricsRecord {
  double accuracy = 0.0;
  double nll = 0.0;                    // mean, nats
  double avg_pred_uncertainty = 0.0;   // mean Shannon entropy, nats
  double confidence_diversity = 0.0;   // differential entropy of true-class confidence
  double degenerate_fraction = 0.0;    // share of samples whose kNN distance hit the floor
  double ece = 0.0;
  std::size_t n_samples = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct MetricsOptions {
  std::size_t knn_k = 3;
  std::size_t ece_bins = 15;
};

// argmax ties resolve to the lowest class index.
std::size_t argmax(std::span<const double> row);

double accuracy(const Matrix& probs, std::span<const int> labels);
double nll(const Matrix& probs, std::span<const int> labels);
double avg_predictive_uncertainty(const Matrix& probs);
std::vector<double> true_class_confidences(const Matrix& probs, std::span<const int> labels);

// Digamma for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);

inline constexpr double kKnnDistanceFloor = 1e-15;

struct KnnEntropy {
  double entropy = 0.0;
  double degenerate_fraction = 0.0;  // samples whose k-th neighbour distance was floored
};

// Kozachenko-Leonenko estimate of differential entropy (nats) of 1-D samples:
//   psi(n) - psi(k) + (1/n) sum_i log(2 eps_i),
// eps_i the distance to the k-th nearest neighbour, floored at 1e-15.
KnnEntropy knn_entropy_1d_detail(std::span<const double> samples, std::size_t k_nn);
double knn_entropy_1d(std::span<const double> samples, std::size_t k_nn);

KnnEntropy confidence_diversity_detail(const Matrix& probs, std::span<const int> labels,
                                       std::size_t k_nn);
double confidence_diversity(const Matrix& probs, std::span<const int> labels, std::size_t k_nn);

// Equal-width bins over (0, 1] by max confidence. A confidence on an interior
// edge falls in the lower bin; anything <= 1/n_bins goes to bin 0.
struct CalibrationBins {
  std::size_t n_bins = 15;
  std::vector<std::size_t> counts;
  std::vector<double> confidence_sum;
  std::vector<double> correct_sum;

  std::size_t total() const;
};

std::size_t calibration_bin(double confidence, std::size_t n_bins);
CalibrationBins calibration_bins(const Matrix& probs, std::span<const int> labels,
                                 std::size_t n_bins);
double ece(const Matrix& probs, std::span<const int> labels, std::size_t n_bins = 15);

// All of the above on one set of predictions.
MetricsRecord evaluate_predictions(const Matrix& probs, std::span<const int> labels,
                                   const MetricsOptions& options = {});

}  // namespace distlab
