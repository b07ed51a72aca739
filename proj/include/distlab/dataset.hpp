#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "distlab/nn.hpp"

namespace distlab {

enum class DataSource { kSynthetic, kCsv };

struct DatasetSpec {
  DataSource source = DataSource::kSynthetic;
  // synthetic
  std::size_t k = 10;
  std::size_t d = 20;
  std::size_t n_train = 2000;
  std::size_t n_test = 5000;
  double cluster_spread = 1.0;  // per-coordinate noise std around each class mean
  double overlap = 0.0;         // in [0,1): pulls class means toward the origin
  std::uint64_t seed = 1;
  // csv
  std::string path;
  std::string label_column = "label";
  double test_fraction = 0.2;
};

void validate_dataset_spec(const DatasetSpec& spec);

struct Dataset {
  Batch train;
  Batch test;
  std::size_t num_classes = 0;
};

// Gaussian mixture: class means ~ N(0, 16 (1 - overlap)^2 I), samples
// mean + cluster_spread * N(0, I), labels uniform. Train and test are
// consecutive draws from one stream and hence disjoint.
Dataset synth_dataset(const DatasetSpec& spec);

struct CsvData {
  Batch rows;                             // indices 0..n-1
  std::vector<std::string> feature_names; // header order, label column removed
  std::vector<std::string> label_names;   // label id -> original cell text
};

// Rectangular numeric CSV with header. Labels become contiguous ids in order
// of first appearance.
CsvData load_csv(const std::filesystem::path& path, const std::string& label_column);

// Writes features then the label column (as its label name) with a header.
void write_csv(const std::filesystem::path& path, const CsvData& data,
               const std::string& label_column);

// Synthetic or CSV dataset per spec; CSV data is split by test_fraction with
// the spec seed.
Dataset load_dataset(const DatasetSpec& spec);

struct TrainValSplit {
  Batch train;
  Batch validation;     // empty when fraction == 0
  std::uint64_t hash;   // identifies the partition
};

// Seeded partition of `data`; both parts get indices renumbered 0..n-1.
TrainValSplit split_validation(const Batch& data, double fraction, std::uint64_t seed);

// First n rows of a seeded shuffle of `data`, indices renumbered.
Batch subsample(const Batch& data, std::size_t n, std::uint64_t seed);

}  // namespace distlab
