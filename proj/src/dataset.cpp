#include "distlab/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace distlab {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ", column '" + column +
                             "': non-numeric cell '" + cell + "'");
  }
  return v;
}

std::uint64_t hash_indices(std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t v : idx) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(v) >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Batch renumbered(Batch b) {
  std::iota(b.indices.begin(), b.indices.end(), 0);
  return b;
}

}  // namespace

void validate_dataset_spec(const DatasetSpec& spec) {
  if (spec.source == DataSource::kCsv) {
    if (spec.path.empty()) throw std::invalid_argument("dataset.path: required for csv source");
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
      throw std::invalid_argument("dataset.test_fraction: must be in (0,1)");
    }
    return;
  }
  if (spec.k < 2) throw std::invalid_argument("dataset.k: need at least 2 classes");
  if (spec.d < 1) throw std::invalid_argument("dataset.d: must be >= 1");
  if (spec.n_train < spec.k) throw std::invalid_argument("dataset.n_train: must be >= k");
  if (spec.n_test < 1) throw std::invalid_argument("dataset.n_test: must be >= 1");
  if (!(spec.cluster_spread > 0.0)) {
    throw std::invalid_argument("dataset.cluster_spread: must be positive");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap < 1.0)) {
    throw std::invalid_argument("dataset.overlap: must be in [0,1)");
  }
}

Dataset synth_dataset(const DatasetSpec& spec) {
  validate_dataset_spec(spec);
  if (spec.source != DataSource::kSynthetic) {
    throw std::invalid_argument("synth_dataset: spec is not synthetic");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(spec.k) - 1);

  const double mean_scale = 4.0 * (1.0 - spec.overlap);
  Matrix means(spec.k, spec.d);
  for (double& v : means.data()) v = mean_scale * normal(rng);

  const auto draw = [&](std::size_t n) {
    Batch b;
    b.features = Matrix(n, spec.d);
    b.labels.resize(n);
    b.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int y = pick(rng);
      b.labels[i] = y;
      b.indices[i] = i;
      const auto mu = means.row(static_cast<std::size_t>(y));
      auto x = b.features.row(i);
      for (std::size_t j = 0; j < spec.d; ++j) x[j] = mu[j] + spec.cluster_spread * normal(rng);
    }
    return b;
  };

  Dataset ds;
  ds.num_classes = spec.k;
  ds.train = draw(spec.n_train);
  ds.test = draw(spec.n_test);
  return ds;
}

CsvData load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: missing header row");
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw std::runtime_error("load_csv: unknown label column '" + label_column + "'");
  }
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

  CsvData data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_pos) data.feature_names.push_back(header[c]);
  }
  const std::size_t d = data.feature_names.size();
  std::map<std::string, int> label_ids;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_pos) continue;
      values.push_back(parse_cell(cells[c], line_no, header[c]));
    }
    const std::string label = trim(cells[label_pos]);
    auto [it, inserted] = label_ids.emplace(label, static_cast<int>(data.label_names.size()));
    if (inserted) data.label_names.push_back(label);
    data.rows.labels.push_back(it->second);
  }
  const std::size_t n = data.rows.labels.size();
  data.rows.features = Matrix(n, d, std::move(values));
  data.rows.indices.resize(n);
  std::iota(data.rows.indices.begin(), data.rows.indices.end(), 0);
  return data;
}

void write_csv(const std::filesystem::path& path, const CsvData& data,
               const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (const auto& name : data.feature_names) out << name << ',';
  out << label_column << '\n';
  out << std::setprecision(17);
  const Batch& b = data.rows;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (double v : b.features.row(i)) out << v << ',';
    out << data.label_names.at(static_cast<std::size_t>(b.labels[i])) << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

Dataset load_dataset(const DatasetSpec& spec) {
  validate_dataset_spec(spec);
  if (spec.source == DataSource::kSynthetic) return synth_dataset(spec);
  const auto csv = load_csv(spec.path, spec.label_column);
  if (csv.label_names.size() < 2) throw std::runtime_error("load_dataset: need >= 2 classes");
  auto split = split_validation(csv.rows, spec.test_fraction, spec.seed);
  Dataset ds;
  ds.num_classes = csv.label_names.size();
  ds.train = std::move(split.train);
  ds.test = std::move(split.validation);
  return ds;
}

TrainValSplit split_validation(const Batch& data, double fraction, std::uint64_t seed) {
  validate_batch(data);
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction: must be in [0,1)");
  }
  const std::size_t n = data.size();
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_val >= n) throw std::invalid_argument("validation split leaves no training data");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> val_rows(perm.begin(), perm.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train_rows(perm.begin() + static_cast<long>(n_val), perm.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  TrainValSplit s;
  s.train = renumbered(select_rows(data, train_rows));
  if (n_val > 0) s.validation = renumbered(select_rows(data, val_rows));
  s.hash = hash_indices(val_rows) ^ (static_cast<std::uint64_t>(n) << 1);
  return s;
}

Batch subsample(const Batch& data, std::size_t n, std::uint64_t seed) {
  validate_batch(data);
  if (n == 0 || n > data.size()) {
    throw std::invalid_argument("subsample: size " + std::to_string(n) + " not in [1, " +
                                std::to_string(data.size()) + "]");
  }
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(n);
  std::sort(perm.begin(), perm.end());
  return renumbered(select_rows(data, perm));
}

}  // namespace distlab
