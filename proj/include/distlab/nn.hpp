#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "distlab/matrix.hpp"

namespace distlab {

// Feedforward ReLU classifier. Layer i maps layer_dims[i] -> layer_dims[i+1];
// hidden layers use ReLU, the output layer is linear (logits).
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;               // layer_dims[i+1] x layer_dims[i]
  std::vector<std::vector<double>> biases;   // layer_dims[i+1]

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t num_classes() const { return layer_dims.back(); }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// A minibatch. `indices` locate each row in the full training set so that
// per-sample state (teacher logits, ranks) can be looked up.
struct Batch {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::size_t> indices;

  std::size_t size() const { return labels.size(); }
};

// Throws std::invalid_argument unless features/labels/indices agree and m >= 1.
void validate_batch(const Batch& batch);

// Rows of `batch` picked by positions `rows`; indices are carried over.
Batch select_rows(const Batch& batch, std::span<const std::size_t> rows);

// Parameter-shaped storage used for gradients and momentum buffers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  friend bool operator==(const Gradients&, const Gradients&) = default;
};

Gradients zeros_like(const MlpModel& model);

struct OptimizerState {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  // (epoch, multiplier): from `epoch` on, lr = learning_rate * multiplier.
  std::vector<std::pair<int, double>> schedule;
  int epoch = 0;
  Gradients velocity;

  double current_learning_rate() const;
};

// Velocity buffers are sized from `model`; the schedule defaults to
// x0.1 at 50% and x0.01 at 75% of `epochs`.
OptimizerState make_optimizer(const MlpModel& model, double learning_rate, double momentum,
                              double weight_decay, int epochs);

std::vector<std::pair<int, double>> step_schedule(int epochs);

// Weights ~ N(0, 1/fan_in), biases zero. Deterministic in (layer_dims, seed).
MlpModel init_model(std::span<const std::size_t> layer_dims, std::uint64_t seed);

// m x d features -> m x k logits.
Matrix forward(const MlpModel& model, const Matrix& features);

// Gradients of the batch loss w.r.t. every parameter, given dLoss/dlogits.
Gradients backward(const MlpModel& model, const Batch& batch, const Matrix& logit_gradient);

// v <- momentum*v + (g + weight_decay*w); w <- w - lr*v. Biases are not decayed.
void sgd_step(MlpModel& model, const Gradients& gradients, OptimizerState& state);

// 64-bit FNV-1a over layer_dims and the raw parameter bytes.
std::uint64_t parameter_hash(const MlpModel& model);

}  // namespace distlab
