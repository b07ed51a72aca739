#include "distlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace distlab {
namespace {

void check_model_shapes(const MlpModel& model) {
  if (model.layer_dims.size() < 2 || model.weights.size() != model.layer_dims.size() - 1 ||
      model.biases.size() != model.weights.size()) {
    throw std::invalid_argument("MlpModel: inconsistent layer count");
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (model.weights[l].rows() != model.layer_dims[l + 1] ||
        model.weights[l].cols() != model.layer_dims[l] ||
        model.biases[l].size() != model.layer_dims[l + 1]) {
      throw std::invalid_argument("MlpModel: layer " + std::to_string(l) + " has wrong shape");
    }
  }
}

void check_gradient_shapes(const MlpModel& model, const Gradients& g, const char* what) {
  if (g.weights.size() != model.weights.size() || g.biases.size() != model.biases.size()) {
    throw std::invalid_argument(std::string(what) + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (!g.weights[l].same_shape(model.weights[l]) ||
        g.biases[l].size() != model.biases[l].size()) {
      throw std::invalid_argument(std::string(what) + ": shape mismatch at layer " +
                                  std::to_string(l));
    }
  }
}

// out = in * W^T + b, optionally followed by ReLU.
Matrix affine(const Matrix& in, const Matrix& w, const std::vector<double>& b, bool relu) {
  const std::size_t m = in.rows();
  const std::size_t n_out = w.rows();
  const std::size_t n_in = w.cols();
  Matrix out(m, n_out);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = in.row(i).data();
    double* y = out.row(i).data();
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wr = w.row(o).data();
      double acc = b[o];
      for (std::size_t j = 0; j < n_in; ++j) acc += wr[j] * x[j];
      y[o] = relu ? std::max(acc, 0.0) : acc;
    }
  }
  return out;
}

// Activations of every layer: acts[0] = input, acts[L] = logits.
std::vector<Matrix> forward_trace(const MlpModel& model, const Matrix& features) {
  check_model_shapes(model);
  if (features.cols() != model.input_dim()) {
    throw std::invalid_argument("forward: feature dim " + std::to_string(features.cols()) +
                                " != model input dim " + std::to_string(model.input_dim()));
  }
  std::vector<Matrix> acts;
  acts.reserve(model.num_layers() + 1);
  acts.push_back(features);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const bool hidden = l + 1 < model.num_layers();
    acts.push_back(affine(acts.back(), model.weights[l], model.biases[l], hidden));
  }
  return acts;
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

void validate_batch(const Batch& batch) {
  const std::size_t m = batch.labels.size();
  if (m == 0) throw std::invalid_argument("Batch: empty");
  if (batch.features.rows() != m || batch.indices.size() != m) {
    throw std::invalid_argument("Batch: features/labels/indices lengths differ");
  }
}

Batch select_rows(const Batch& batch, std::span<const std::size_t> rows) {
  Batch out;
  out.features = gather_rows(batch.features, rows);
  out.labels.reserve(rows.size());
  out.indices.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(batch.labels.at(r));
    out.indices.push_back(batch.indices.at(r));
  }
  return out;
}

Gradients zeros_like(const MlpModel& model) {
  Gradients g;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

double OptimizerState::current_learning_rate() const {
  double mult = 1.0;
  for (const auto& [at, m] : schedule) {
    if (epoch >= at) mult = m;
  }
  return learning_rate * mult;
}

std::vector<std::pair<int, double>> step_schedule(int epochs) {
  return {{epochs / 2, 0.1}, {(3 * epochs) / 4, 0.01}};
}

OptimizerState make_optimizer(const MlpModel& model, double learning_rate, double momentum,
                              double weight_decay, int epochs) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("optimizer: momentum must be in [0,1)");
  }
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("optimizer: weight_decay must be >= 0");
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  s.schedule = step_schedule(epochs);
  s.velocity = zeros_like(model);
  return s;
}

MlpModel init_model(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw std::invalid_argument("init_model: need at least two layers");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw std::invalid_argument("init_model: layer dims must be positive");
  }
  MlpModel model;
  model.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(layer_dims[l + 1], fan_in);
    for (double& v : w.data()) v = normal(rng) * scale;
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(layer_dims[l + 1], 0.0);
  }
  return model;
}

Matrix forward(const MlpModel& model, const Matrix& features) {
  return std::move(forward_trace(model, features).back());
}

Gradients backward(const MlpModel& model, const Batch& batch, const Matrix& logit_gradient) {
  validate_batch(batch);
  const auto acts = forward_trace(model, batch.features);
  if (!logit_gradient.same_shape(acts.back())) {
    throw std::invalid_argument("backward: logit gradient is " + shape_string(logit_gradient) +
                                ", expected " + shape_string(acts.back()));
  }
  Gradients g = zeros_like(model);
  Matrix delta = logit_gradient;
  const std::size_t m = batch.size();
  for (std::size_t l = model.num_layers(); l-- > 0;) {
    const Matrix& in = acts[l];
    const Matrix& w = model.weights[l];
    Matrix& gw = g.weights[l];
    auto& gb = g.biases[l];
    for (std::size_t i = 0; i < m; ++i) {
      const double* d = delta.row(i).data();
      const double* x = in.row(i).data();
      for (std::size_t o = 0; o < w.rows(); ++o) {
        if (d[o] == 0.0) continue;
        gb[o] += d[o];
        double* gwr = gw.row(o).data();
        for (std::size_t j = 0; j < w.cols(); ++j) gwr[j] += d[o] * x[j];
      }
    }
    if (l == 0) break;
    // Propagate through W and the ReLU of the previous layer.
    Matrix next(m, w.cols());
    for (std::size_t i = 0; i < m; ++i) {
      const double* d = delta.row(i).data();
      const double* a = in.row(i).data();
      double* nd = next.row(i).data();
      for (std::size_t o = 0; o < w.rows(); ++o) {
        if (d[o] == 0.0) continue;
        const double* wr = w.row(o).data();
        for (std::size_t j = 0; j < w.cols(); ++j) nd[j] += d[o] * wr[j];
      }
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (a[j] <= 0.0) nd[j] = 0.0;
      }
    }
    delta = std::move(next);
  }
  return g;
}

void sgd_step(MlpModel& model, const Gradients& gradients, OptimizerState& state) {
  check_gradient_shapes(model, gradients, "sgd_step");
  check_gradient_shapes(model, state.velocity, "sgd_step velocity");
  const double lr = state.current_learning_rate();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto& w = model.weights[l].data();
    auto& vw = state.velocity.weights[l].data();
    const auto& gw = gradients.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      vw[i] = state.momentum * vw[i] + (gw[i] + state.weight_decay * w[i]);
      w[i] -= lr * vw[i];
    }
    auto& b = model.biases[l];
    auto& vb = state.velocity.biases[l];
    const auto& gb = gradients.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) {
      vb[i] = state.momentum * vb[i] + gb[i];
      b[i] -= lr * vb[i];
    }
  }
}

std::uint64_t parameter_hash(const MlpModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t d : model.layer_dims) {
    const auto v = static_cast<std::uint64_t>(d);
    fnv_mix(h, &v, sizeof v);
  }
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    fnv_mix(h, model.weights[l].data().data(), model.weights[l].size() * sizeof(double));
    fnv_mix(h, model.biases[l].data(), model.biases[l].size() * sizeof(double));
  }
  return h;
}

}  // namespace distlab
