#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distlab/config.hpp"
#include "distlab/dataset.hpp"
#include "distlab/metrics.hpp"
#include "distlab/nn.hpp"
#include "distlab/results.hpp"
#include "distlab/targets.hpp"

namespace distlab {

// Train / validation / test partitions shared by every run of one repeat.
struct SplitData {
  Batch train;
  Batch validation;  // empty when validation_fraction == 0
  Batch test;
  std::size_t num_classes = 0;
  std::uint64_t split_hash = 0;
};

SplitData prepare_split(const Dataset& data, double validation_fraction, std::uint64_t seed);

// Seed of repeat r: config.seed + 1000 r.
std::uint64_t repeat_seed(const ExperimentConfig& config, int repeat);

// Full layer dims: input, hidden..., classes.
std::vector<std::size_t> layer_dims_for(const SplitData& data, std::span<const std::size_t> hidden);

struct TargetsSource {
  TargetSpec spec;
  const MlpModel* teacher = nullptr;  // required by schemes that distill
};

struct TrainResult {
  MlpModel model;
  EmaState ema;
  std::vector<MetricsRecord> history;  // per epoch, on the validation set (train if none)
  int best_epoch = 0;
  double wall_seconds = 0.0;
};

// Trains a fresh model (init and shuffling seeded by `seed`) on data.train.
// With early stopping the returned model is the epoch with the lowest
// validation NLL.
TrainResult train_run(const ExperimentConfig& config, std::span<const std::size_t> hidden,
                      const SplitData& data, const TargetsSource& source, std::uint64_t seed);

// Metrics of `model` on `batch`, predictions tempered by T.
MetricsRecord evaluate_model(const MlpModel& model, const Batch& batch,
                             const ExperimentConfig& config, double temperature = 1.0);

struct GenerationRecord {
  int generation = 0;
  double temperature = 1.0;
  double alpha = 0.0;
  double test_accuracy = 0.0;
  double test_nll = 0.0;
  double test_ece = 0.0;
  // Teacher predictions on the training set (the generation itself for 0).
  double train_avg_pred_uncertainty = 0.0;
  double train_confidence_diversity = 0.0;
  double train_degenerate_fraction = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct BanResult {
  std::vector<GenerationRecord> records;
  std::vector<MlpModel> models;  // models[i] trained at generation i
};

// Generation 0 is trained with CE; generation i >= 1 distills from the frozen
// generation i - 1 with (targets.alpha, targets.temperature). Generation i is
// seeded with repeat_seed + i.
BanResult ban_sequence(const ExperimentConfig& config, const SplitData& data, int repeat = 0);

// One student per temperature from a shared teacher, alpha = targets.alpha.
// Students are seeded like BAN generation 1, so T = 1 reproduces it.
std::vector<GenerationRecord> temperature_sweep(const ExperimentConfig& config,
                                                const SplitData& data, const MlpModel& teacher,
                                                std::span<const double> temperatures,
                                                int repeat = 0);

// alpha + (1 - alpha) * mean_i softmax(f_i / T)[y_i].
double mean_effective_label(const Matrix& teacher_logits, std::span<const int> labels,
                            double alpha, double temperature);

// Bisection in log T over [1e-3, 1e6] for mean_effective_label == g.
// Throws std::runtime_error if g is not bracketed on that range.
double matched_smoothing_calibration(const MlpModel& teacher, const Batch& train, double alpha,
                                     double g);

// One evaluated run inside a multi-run experiment.
struct SchemeRecord {
  std::string scheme;
  int repeat = 0;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  double alpha = 0.0;
  double smoothing = 0.0;
  MetricsRecord test;
  std::uint64_t split_hash = 0;
  double wall_seconds = 0.0;
  // Sweeps only.
  std::string axis;
  double axis_value = 0.0;
  double teacher_accuracy = 0.0;
  double relative_improvement = 0.0;
};

struct SchemeSummary {
  std::string scheme;
  std::size_t runs = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // sample standard deviation
  double ece_mean = 0.0;
  double ece_std = 0.0;
};

// Mean and sample std of accuracy and ECE per scheme, in first-seen order.
std::vector<SchemeSummary> summarize(std::span<const SchemeRecord> records);

// CE, LS(epsilon), Beta(beta_alpha, g) and SD(sd_alpha, T matched to g), all
// repeats sharing splits and seeds across schemes. The CE model of each
// repeat is the SD teacher.
std::vector<SchemeRecord> comparison_suite(const ExperimentConfig& config, const Dataset& data);

enum class SweepAxis {
  kTrainsetSize,
  kWeightDecay,
  kEpsilon,
  kKeepFraction,
  kGamma,
  kStudentScaling,  // values are temperatures; both scaling variants per T
  kTemperature,
};

const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

std::vector<SchemeRecord> sweep(const ExperimentConfig& config, const Dataset& data,
                                SweepAxis axis, std::span<const double> values);

// Four runs per repeat: SD within hidden, SD within hidden_b, and the two
// cross pairs, each at the temperature matching targets.g.
std::vector<SchemeRecord> cross_distill(const ExperimentConfig& config, const Dataset& data);

// Conversion into the persisted table.
ResultsTable to_table(std::span<const GenerationRecord> records, const std::string& scheme,
                      const ExperimentConfig& config);
ResultsTable to_table(std::span<const SchemeRecord> records, const ExperimentConfig& config);

}  // namespace distlab
