#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace distlab {

// One line of a results file. Which metric columns are populated depends on
// the experiment: BAN and temperature rows carry the teacher's training-set
// uncertainty/diversity, all other rows carry the evaluated model's test-set
// values.
struct ResultRow {
  std::string scheme;
  int generation = 0;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  double alpha = 0.0;
  double smoothing = 0.0;  // beta, epsilon or g, depending on the scheme
  double accuracy = 0.0;
  double nll = 0.0;
  double ece = 0.0;
  double avg_pred_uncertainty = 0.0;
  double confidence_diversity = 0.0;
  double degenerate_fraction = 0.0;
  double wall_seconds = 0.0;
  std::string config_hash;
  std::string axis;           // sweep axis, empty outside sweeps
  double axis_value = 0.0;
  double relative_improvement = 0.0;  // (student - teacher) / teacher accuracy
  std::string artifact_version;
};

bool operator==(const ResultRow& a, const ResultRow& b);  // NaN equals NaN

struct ResultsTable {
  std::vector<ResultRow> rows;
  friend bool operator==(const ResultsTable&, const ResultsTable&) = default;
};

// Column order of every results file.
const std::vector<std::string>& results_header();

// CSV, one header line, floats with 17 significant digits.
void write_results(std::ostream& out, const ResultsTable& table);
void write_results(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable read_results(std::istream& in);
ResultsTable read_results(const std::filesystem::path& path);

}  // namespace distlab
