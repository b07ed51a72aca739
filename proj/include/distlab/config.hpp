#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "distlab/dataset.hpp"

namespace distlab {

// How per-sample training targets are formed.
enum class TargetScheme {
  kCe,               // one-hot cross-entropy
  kLabelSmoothing,   // explicit soft labels with epsilon
  kLsMap,            // label smoothing written as a MAP objective with strength beta
  kPredUncertainty,  // cross-entropy plus negative-entropy penalty beta
  kDistill,          // alpha * CE + (1 - alpha) * distillation at temperature T
  kBeta,             // Beta smoothing mixed with alpha * one-hot
  kEmaSelf,          // EMA predictions as soft labels mixed with alpha * one-hot
  kPruned,           // pruned teacher targets mixed with alpha * one-hot
  kWeightedSd,       // omega-weighted distillation with strength beta
  kDirichletMap,     // MAP targets under alpha_x = beta exp(f/T) + gamma
};

const char* scheme_name(TargetScheme s);
TargetScheme parse_scheme(const std::string& name);
// Schemes that need a frozen teacher.
bool needs_teacher(TargetScheme s);

struct TargetSpec {
  TargetScheme scheme = TargetScheme::kCe;
  double alpha = 0.6;
  double temperature = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double epsilon = 0.15;
  double keep_fraction = 0.5;
  double g = 0.85;       // target mean ground-truth mass for Beta smoothing
  double beta_a = 0.0;   // Beta(a,1) shape; 0 means solve it from (g, alpha)
  bool use_ema_ranking = true;
  bool student_scaling = false;
};

struct TrainConfig {
  int epochs = 60;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double validation_fraction = 0.1;
  bool early_stopping = true;
  double ema_decay = 0.99;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<std::size_t> hidden = {128};
  std::vector<std::size_t> hidden_b = {64, 64};
  TrainConfig train;
  TargetSpec targets;
  int generations = 10;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::size_t knn_k = 3;
  std::size_t ece_bins = 15;
  double sd_alpha = 0.6;    // self-distillation arm of the comparison suite
  double beta_alpha = 0.4;  // Beta-smoothing arm of the comparison suite
  bool record_wall_time = false;
};

// Configuration problems; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError naming the key of the first violated invariant.
void validate_config(const ExperimentConfig& config);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Canonical text form: sections and keys sorted, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& config);

// Hex FNV-1a-64 of serialize_config(config).
std::string config_hash(const ExperimentConfig& config);

// Markdown table of every key with its type, default and meaning.
std::string config_reference();

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace distlab
