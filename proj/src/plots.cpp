#include "distlab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace distlab {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

class Canvas {
 public:
  Canvas(const std::string& title, const std::string& x_label, const std::string& y_label) {
    s_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << esc(title) << "</text>\n"
       << "<text x=\"" << num(kLeft + plot_w() / 2) << "\" y=\"" << num(kHeight - 10)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << esc(x_label) << "</text>\n"
       << "<text x=\"16\" y=\"" << num(kTop + plot_h() / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       << "transform=\"rotate(-90 16 " << num(kTop + plot_h() / 2) << ")\">" << esc(y_label)
       << "</text>\n";
  }

  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void set_ranges(Range x, Range y) {
    x_ = x;
    y_ = y;
  }
  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + (y_.hi - y) / (y_.hi - y_.lo) * plot_h(); }

  void axes(bool x_ticks) {
    s_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w())
       << "\" height=\"" << num(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      s_ << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick(yv)
         << "</text>\n";
      if (x_ticks) {
        const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0;
        s_ << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h() + 16)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << tick(xv) << "</text>\n";
      }
    }
  }

  void legend(std::size_t slot, const std::string& name, const std::string& color, bool dashed) {
    const double y = kTop + 14 + 18 * static_cast<double>(slot);
    const double x = kLeft + plot_w() + 10;
    s_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 20)
       << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
       << (dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n"
       << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y + 4)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(name) << "</text>\n";
  }

  std::ostringstream& raw() { return s_; }

  std::string finish() {
    s_ << "</svg>\n";
    return s_.str();
  }

 private:
  std::ostringstream s_;
  Range x_, y_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) s += x, ++n;
  }
  return n ? s / static_cast<double>(n) : std::nan("");
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) s += (x - m) * (x - m), ++n;
  }
  return n > 1 ? std::sqrt(s / static_cast<double>(n - 1)) : 0.0;
}

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plots: cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("emit_plots: write failed for " + path.string());
  written.push_back(path);
}

struct Metric {
  const char* file;
  const char* label;
  double ResultRow::*field;
  bool reference_is_min;
};

const Metric kPanels[] = {
    {"accuracy", "test accuracy", &ResultRow::accuracy, false},
    {"nll", "test NLL", &ResultRow::nll, true},
    {"apu", "avg predictive uncertainty (teacher, train)", &ResultRow::avg_pred_uncertainty,
     false},
    {"cd", "confidence diversity (teacher, train)", &ResultRow::confidence_diversity, false},
};

// Mean of `field` per (scheme, x), schemes in first-seen order.
std::vector<Series> grouped(const std::vector<const ResultRow*>& rows,
                            double (*x_of)(const ResultRow&), double ResultRow::*field) {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<double>>> acc;
  for (const auto* r : rows) {
    if (!acc.count(r->scheme)) order.push_back(r->scheme);
    acc[r->scheme][x_of(*r)].push_back(r->*field);
  }
  std::vector<Series> out;
  for (const auto& name : order) {
    Series s{name, {}, {}};
    for (const auto& [x, ys] : acc[name]) {
      s.x.push_back(x);
      s.y.push_back(mean_of(ys));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double x_generation(const ResultRow& r) { return r.generation; }
double x_axis(const ResultRow& r) { return r.axis_value; }

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           const std::vector<RefLine>& refs) {
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("line_chart_svg: ragged series");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.y[i])) xr.add(s.x[i]), yr.add(s.y[i]);
    }
  }
  for (const auto& r : refs) yr.add(r.y);
  xr.finish();
  yr.finish();

  Canvas c(title, x_label, y_label);
  c.set_ranges(xr, yr);
  c.axes(true);
  std::size_t slot = 0;
  auto& s = c.raw();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t j = 0; j < series[i].x.size(); ++j) {
      const double y = series[i].y[j];
      if (!std::isfinite(y)) continue;
      const double px = c.px(series[i].x[j]);
      const double py = c.py(y);
      pts += num(px) + "," + num(py) + " ";
      s << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    if (!pts.empty()) {
      pts.pop_back();
      s << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    }
    c.legend(slot++, series[i].name, color, false);
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::string color = kPalette[(series.size() + i) % std::size(kPalette)];
    const double y = c.py(refs[i].y);
    s << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\""
      << num(kLeft + Canvas::plot_w()) << "\" y2=\"" << num(y) << "\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
    c.legend(slot++, refs[i].name, color, true);
  }
  return c.finish();
}

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<Bar>& bars) {
  Range yr;
  yr.add(0.0);
  for (const auto& b : bars) {
    yr.add(b.value + b.error);
    yr.add(b.value - b.error);
  }
  yr.finish();
  Range xr;
  xr.lo = 0.0;
  xr.hi = std::max<double>(1.0, static_cast<double>(bars.size()));

  Canvas c(title, "scheme", y_label);
  c.set_ranges(xr, yr);
  c.axes(false);
  auto& s = c.raw();
  const double slot_w = Canvas::plot_w() / xr.hi;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const std::string color = kPalette[i % std::size(kPalette)];
    const double cx = c.px(static_cast<double>(i) + 0.5);
    const double y0 = c.py(0.0);
    const double y1 = c.py(b.value);
    s << "<rect x=\"" << num(cx - 0.3 * slot_w) << "\" y=\"" << num(std::min(y0, y1))
      << "\" width=\"" << num(0.6 * slot_w) << "\" height=\"" << num(std::abs(y1 - y0))
      << "\" fill=\"" << color << "\"/>\n";
    if (b.error > 0.0) {
      const double top = c.py(b.value + b.error);
      const double bot = c.py(b.value - b.error);
      s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(top) << "\" x2=\"" << num(cx)
        << "\" y2=\"" << num(bot) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(cx - 6) << "\" y1=\"" << num(top) << "\" x2=\"" << num(cx + 6)
        << "\" y2=\"" << num(top) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(cx - 6) << "\" y1=\"" << num(bot) << "\" x2=\"" << num(cx + 6)
        << "\" y2=\"" << num(bot) << "\" stroke=\"black\"/>\n";
    }
    s << "<text x=\"" << num(cx) << "\" y=\"" << num(kTop + Canvas::plot_h() + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << esc(b.label)
      << "</text>\n";
  }
  return c.finish();
}

std::vector<std::filesystem::path> emit_plots(const ResultsTable& table,
                                              const std::filesystem::path& out_dir,
                                              const ResultsTable* reference) {
  if (table.rows.empty()) throw std::invalid_argument("emit_plots: empty results table");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  std::vector<const ResultRow*> rows;
  for (const auto& r : table.rows) rows.push_back(&r);
  const std::string axis = table.rows.front().axis;
  const bool all_ban = std::all_of(table.rows.begin(), table.rows.end(),
                                   [](const ResultRow& r) { return r.scheme == "ban"; });

  if (axis == "temperature") {
    for (const auto& m : kPanels) {
      std::vector<RefLine> refs;
      if (reference != nullptr && !reference->rows.empty()) {
        std::vector<const ResultRow*> ref_rows;
        for (const auto& r : reference->rows) ref_rows.push_back(&r);
        const auto per_gen = grouped(ref_rows, x_generation, m.field);
        for (const auto& s : per_gen) {
          double best = m.reference_is_min ? std::numeric_limits<double>::infinity()
                                           : -std::numeric_limits<double>::infinity();
          for (double y : s.y) {
            if (!std::isfinite(y)) continue;
            best = m.reference_is_min ? std::min(best, y) : std::max(best, y);
          }
          if (std::isfinite(best)) {
            refs.push_back({s.name + (m.reference_is_min ? " min" : " max"), best});
          }
        }
      }
      write_file(out_dir / (std::string("temperature_") + m.file + ".svg"),
                 line_chart_svg(std::string(m.label) + " vs temperature", "T", m.label,
                                grouped(rows, x_axis, m.field), refs),
                 written);
    }
  } else if (!axis.empty()) {
    write_file(out_dir / ("sweep_" + axis + "_accuracy.svg"),
               line_chart_svg("accuracy vs " + axis, axis, "test accuracy",
                              grouped(rows, x_axis, &ResultRow::accuracy)),
               written);
    std::vector<const ResultRow*> students;
    for (const auto* r : rows) {
      if (r->scheme != "teacher") students.push_back(r);
    }
    if (!students.empty()) {
      write_file(out_dir / ("sweep_" + axis + "_relative_improvement.svg"),
                 line_chart_svg("relative improvement vs " + axis, axis,
                                "(student - teacher) / teacher",
                                grouped(students, x_axis, &ResultRow::relative_improvement)),
                 written);
    }
  } else if (all_ban) {
    for (const auto& m : kPanels) {
      write_file(out_dir / (std::string("ban_") + m.file + ".svg"),
                 line_chart_svg(std::string(m.label) + " vs generation", "generation", m.label,
                                grouped(rows, x_generation, m.field)),
                 written);
    }
  } else {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> acc, ece;
    for (const auto* r : rows) {
      if (!acc.count(r->scheme)) order.push_back(r->scheme);
      acc[r->scheme].push_back(r->accuracy);
      ece[r->scheme].push_back(r->ece);
    }
    std::vector<Bar> acc_bars, ece_bars;
    for (const auto& name : order) {
      acc_bars.push_back({name, mean_of(acc[name]), std_of(acc[name])});
      ece_bars.push_back({name, mean_of(ece[name]), std_of(ece[name])});
    }
    write_file(out_dir / "schemes_accuracy.svg",
               bar_chart_svg("test accuracy by scheme", "accuracy", acc_bars), written);
    write_file(out_dir / "schemes_ece.svg", bar_chart_svg("test ECE by scheme", "ECE", ece_bars),
               written);
  }
  return written;
}

}  // namespace distlab
