#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "distlab/results.hpp"

namespace distlab {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // non-finite points are skipped
};

struct RefLine {
  std::string name;
  double y = 0.0;
};

struct Bar {
  std::string label;
  double value = 0.0;
  double error = 0.0;  // half-height of the error bar, 0 draws none
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           const std::vector<RefLine>& refs = {});

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<Bar>& bars);

// Picks the layout from the table contents:
//   axis == "temperature"  -> metric vs T, with flat reference lines taken from
//                             `reference` (a BAN table) when given
//   other sweep axes       -> accuracy and relative improvement vs axis value
//   scheme "ban"           -> four panels vs generation, averaged over seeds
//   anything else          -> accuracy and ECE bars per scheme, error bars are
//                             the sample std over repeats
// Returns the files written. Throws on an empty table.
std::vector<std::filesystem::path> emit_plots(const ResultsTable& table,
                                              const std::filesystem::path& out_dir,
                                              const ResultsTable* reference = nullptr);

}  // namespace distlab
