#include "distlab/results.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace distlab {
namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_cell(const std::string& s, const char* column) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument(std::string("write_results: ") + column +
                                " contains a comma, quote or newline: " + s);
  }
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("read_results: line " + std::to_string(line) + ": bad number '" + s +
                             "'");
  }
  return x;
}

template <class T>
T parse_int(const std::string& s, std::size_t line) {
  T x{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("read_results: line " + std::to_string(line) + ": bad integer '" +
                             s + "'");
  }
  return x;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.scheme == b.scheme && a.generation == b.generation && a.seed == b.seed &&
         same(a.temperature, b.temperature) && same(a.alpha, b.alpha) &&
         same(a.smoothing, b.smoothing) && same(a.accuracy, b.accuracy) && same(a.nll, b.nll) &&
         same(a.ece, b.ece) && same(a.avg_pred_uncertainty, b.avg_pred_uncertainty) &&
         same(a.confidence_diversity, b.confidence_diversity) &&
         same(a.degenerate_fraction, b.degenerate_fraction) &&
         same(a.wall_seconds, b.wall_seconds) && a.config_hash == b.config_hash &&
         a.axis == b.axis && same(a.axis_value, b.axis_value) &&
         same(a.relative_improvement, b.relative_improvement) &&
         a.artifact_version == b.artifact_version;
}

const std::vector<std::string>& results_header() {
  static const std::vector<std::string> header = {
      "scheme", "generation", "seed", "T", "alpha", "beta_epsilon_g", "accuracy", "nll", "ece",
      "avg_pred_uncertainty", "confidence_diversity", "degenerate_fraction", "wall_seconds",
      "config_hash", "axis", "axis_value", "relative_improvement", "artifact_version"};
  return header;
}

void write_results(std::ostream& out, const ResultsTable& table) {
  const auto& header = results_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : table.rows) {
    check_cell(r.scheme, "scheme");
    check_cell(r.config_hash, "config_hash");
    check_cell(r.axis, "axis");
    check_cell(r.artifact_version, "artifact_version");
    out << r.scheme << ',' << r.generation << ',' << r.seed << ',' << fmt(r.temperature) << ','
        << fmt(r.alpha) << ',' << fmt(r.smoothing) << ',' << fmt(r.accuracy) << ','
        << fmt(r.nll) << ',' << fmt(r.ece) << ',' << fmt(r.avg_pred_uncertainty) << ','
        << fmt(r.confidence_diversity) << ',' << fmt(r.degenerate_fraction) << ','
        << fmt(r.wall_seconds) << ',' << r.config_hash << ',' << r.axis << ','
        << fmt(r.axis_value) << ',' << fmt(r.relative_improvement) << ',' << r.artifact_version
        << '\n';
  }
}

void write_results(const ResultsTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_results: cannot open " + path.string());
  write_results(out, table);
  if (!out) throw std::runtime_error("write_results: write failed for " + path.string());
}

ResultsTable read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_results: empty file");
  std::string expected;
  for (const auto& h : results_header()) expected += (expected.empty() ? "" : ",") + h;
  if (line != expected) throw std::runtime_error("read_results: unexpected header");

  ResultsTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (line.back() == ',') c.emplace_back();
    if (c.size() != results_header().size()) {
      throw std::runtime_error("read_results: line " + std::to_string(line_no) + " has " +
                               std::to_string(c.size()) + " cells");
    }
    ResultRow r;
    r.scheme = c[0];
    r.generation = parse_int<int>(c[1], line_no);
    r.seed = parse_int<std::uint64_t>(c[2], line_no);
    r.temperature = parse_double(c[3], line_no);
    r.alpha = parse_double(c[4], line_no);
    r.smoothing = parse_double(c[5], line_no);
    r.accuracy = parse_double(c[6], line_no);
    r.nll = parse_double(c[7], line_no);
    r.ece = parse_double(c[8], line_no);
    r.avg_pred_uncertainty = parse_double(c[9], line_no);
    r.confidence_diversity = parse_double(c[10], line_no);
    r.degenerate_fraction = parse_double(c[11], line_no);
    r.wall_seconds = parse_double(c[12], line_no);
    r.config_hash = c[13];
    r.axis = c[14];
    r.axis_value = parse_double(c[15], line_no);
    r.relative_improvement = parse_double(c[16], line_no);
    r.artifact_version = c[17];
    table.rows.push_back(std::move(r));
  }
  return table;
}

ResultsTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_results: cannot open " + path.string());
  return read_results(in);
}

}  // namespace distlab
