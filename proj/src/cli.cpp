#include "distlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "distlab/checkpoint.hpp"
#include "distlab/config.hpp"
#include "distlab/harness.hpp"
#include "distlab/plots.hpp"
#include "distlab/version.hpp"

namespace distlab {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : parse_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  validate_config(config);
  return config;
}

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
  if (with_config) sub->add_option("--config", c.config_path, "experiment config file");
  sub->add_option("--out", c.out_dir, "output directory");
  sub->add_option("--seed", c.seed, "override experiment.seed");
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_metrics(std::ostream& out, const MetricsRecord& m) {
  out << "accuracy " << g17(m.accuracy) << '\n'
      << "nll " << g17(m.nll) << '\n'
      << "ece " << g17(m.ece) << '\n'
      << "avg_pred_uncertainty " << g17(m.avg_pred_uncertainty) << '\n'
      << "confidence_diversity " << g17(m.confidence_diversity) << '\n'
      << "degenerate_fraction " << g17(m.degenerate_fraction) << '\n'
      << "n_samples " << m.n_samples << '\n';
}

ResultRow metrics_row(const std::string& scheme, const ExperimentConfig& config, std::uint64_t seed,
                      const TargetSpec& t, const MetricsRecord& m, double wall) {
  ResultRow row;
  row.scheme = scheme;
  row.seed = seed;
  row.temperature = t.temperature;
  row.alpha = t.alpha;
  row.accuracy = m.accuracy;
  row.nll = m.nll;
  row.ece = m.ece;
  row.avg_pred_uncertainty = m.avg_pred_uncertainty;
  row.confidence_diversity = m.confidence_diversity;
  row.degenerate_fraction = m.degenerate_fraction;
  row.wall_seconds = wall;
  row.config_hash = config_hash(config);
  row.artifact_version = kArtifactVersion;
  return row;
}

void write_outputs(const ResultsTable& table, const fs::path& dir, std::ostream& out,
                   const ResultsTable* reference = nullptr) {
  fs::create_directories(dir);
  write_results(table, dir / "results.csv");
  out << "wrote " << (dir / "results.csv").string() << '\n';
  for (const auto& p : emit_plots(table, dir, reference)) out << "wrote " << p.string() << '\n';
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw ConfigError("sweep --values: not a number: '" + cell + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("sweep --values: empty list");
  return values;
}

int cmd_train(const Common& c, std::ostream& out) {
  const auto config = load_config(c);
  const Dataset data = load_dataset(config.dataset);
  const SplitData split = prepare_split(data, config.train.validation_fraction, config.seed);
  const TargetSpec ce{TargetScheme::kCe, 1.0, 1.0};
  std::optional<TrainResult> teacher;
  std::uint64_t seed = config.seed;
  if (needs_teacher(config.targets.scheme)) {
    teacher = train_run(config, config.hidden, split, {ce, nullptr}, seed);
    ++seed;
  }
  const auto run = train_run(config, config.hidden, split,
                             {config.targets, teacher ? &teacher->model : nullptr}, seed);
  const auto test = evaluate_model(run.model, split.test, config);

  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  save_checkpoint(dir / "model.dfck", run.model);
  ResultsTable table;
  table.rows.push_back(
      metrics_row(scheme_name(config.targets.scheme), config, seed, config.targets, test,
                  run.wall_seconds));
  write_results(table, dir / "results.csv");
  out << "best epoch " << run.best_epoch << '\n';
  print_metrics(out, test);
  out << "wrote " << (dir / "model.dfck").string() << '\n'
      << "wrote " << (dir / "results.csv").string() << '\n';
  return 0;
}

int cmd_ban(const Common& c, std::ostream& out) {
  const auto config = load_config(c);
  const Dataset data = load_dataset(config.dataset);
  ResultsTable table;
  for (int r = 0; r < config.repeats; ++r) {
    const SplitData split =
        prepare_split(data, config.train.validation_fraction, repeat_seed(config, r));
    const auto ban = ban_sequence(config, split, r);
    for (const auto& g : ban.records) {
      out << "repeat " << r << " generation " << g.generation << " accuracy "
          << g17(g.test_accuracy) << '\n';
    }
    const auto part = to_table(ban.records, "ban", config);
    table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
  }
  write_outputs(table, c.out_dir, out);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis_text, const std::string& values_text,
              const std::string& reference_path, std::ostream& out) {
  const auto config = load_config(c);
  const SweepAxis axis = parse_axis(axis_text);
  const auto values = parse_values(values_text);
  const Dataset data = load_dataset(config.dataset);
  ResultsTable table;
  if (axis == SweepAxis::kTemperature) {
    // The teacher is BAN generation 0 of the same repeat.
    for (int r = 0; r < config.repeats; ++r) {
      const std::uint64_t seed = repeat_seed(config, r);
      const SplitData split = prepare_split(data, config.train.validation_fraction, seed);
      const TargetSpec ce{TargetScheme::kCe, 1.0, 1.0};
      const auto teacher = train_run(config, config.hidden, split, {ce, nullptr}, seed);
      const auto recs = temperature_sweep(config, split, teacher.model, values, r);
      auto part = to_table(recs, "tsweep", config);
      for (auto& row : part.rows) {
        row.axis = "temperature";
        row.axis_value = row.temperature;
        table.rows.push_back(row);
      }
    }
  } else {
    const auto recs = sweep(config, data, axis, values);
    table = to_table(recs, config);
  }
  std::optional<ResultsTable> reference;
  if (!reference_path.empty()) reference = read_results(fs::path(reference_path));
  write_outputs(table, c.out_dir, out, reference ? &*reference : nullptr);
  return 0;
}

void print_summary(const std::vector<SchemeRecord>& recs, std::ostream& out) {
  for (const auto& s : summarize(recs)) {
    out << s.scheme << ": accuracy " << g17(s.accuracy_mean) << " +- " << g17(s.accuracy_std)
        << ", ece " << g17(s.ece_mean) << " +- " << g17(s.ece_std) << " (" << s.runs
        << " runs)\n";
  }
}

int cmd_compare(const Common& c, bool cross, std::ostream& out) {
  const auto config = load_config(c);
  const Dataset data = load_dataset(config.dataset);
  const auto recs = cross ? cross_distill(config, data) : comparison_suite(config, data);
  print_summary(recs, out);
  write_outputs(to_table(recs, config), c.out_dir, out);
  return 0;
}

int cmd_metrics(const Common& c, const std::string& checkpoint, std::ostream& out) {
  const auto config = load_config(c);
  const MlpModel model = load_checkpoint(checkpoint);
  const Dataset data = load_dataset(config.dataset);
  const SplitData split = prepare_split(data, config.train.validation_fraction, config.seed);
  if (model.input_dim() != split.test.features.cols() || model.num_classes() != split.num_classes) {
    throw std::runtime_error("metrics: checkpoint shape does not match the dataset");
  }
  const auto test = evaluate_model(model, split.test, config);
  print_metrics(out, test);
  if (!c.out_dir.empty() && c.out_dir != ".") {
    fs::create_directories(c.out_dir);
    ResultsTable table;
    table.rows.push_back(metrics_row("checkpoint", config, config.seed, TargetSpec{}, test, 0.0));
    write_results(table, fs::path(c.out_dir) / "metrics.csv");
  }
  return 0;
}

int cmd_plot(const Common& c, const std::string& results, const std::string& reference_path,
             std::ostream& out) {
  const auto table = read_results(fs::path(results));
  std::optional<ResultsTable> reference;
  if (!reference_path.empty()) reference = read_results(fs::path(reference_path));
  for (const auto& p : emit_plots(table, c.out_dir, reference ? &*reference : nullptr)) {
    out << "wrote " << p.string() << '\n';
  }
  return 0;
}

int cmd_calibrate(const Common& c, std::optional<double> alpha, std::optional<double> g,
                  std::ostream& out) {
  const auto config = load_config(c);
  const double a = alpha.value_or(config.sd_alpha);
  const double target = g.value_or(config.targets.g);
  const Dataset data = load_dataset(config.dataset);
  const SplitData split = prepare_split(data, config.train.validation_fraction, config.seed);
  const TargetSpec ce{TargetScheme::kCe, 1.0, 1.0};
  const auto teacher = train_run(config, config.hidden, split, {ce, nullptr}, config.seed);
  const double t = matched_smoothing_calibration(teacher.model, split.train, a, target);
  out << "T " << g17(t) << '\n'
      << "effective_label "
      << g17(mean_effective_label(forward(teacher.model, split.train.features),
                                  split.train.labels, a, t))
      << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"distlab: self-distillation and label smoothing experiments", "distlab"};
  app.set_version_flag("--version", std::string(kArtifactVersion));
  app.require_subcommand(1);

  Common common;
  std::string axis, values, checkpoint, results, reference;
  std::optional<double> alpha, g;

  auto* train = app.add_subcommand("train", "train one model with the configured targets");
  add_common(train, common);
  auto* ban = app.add_subcommand("ban", "born-again generation sequence");
  add_common(ban, common);
  auto* sw = app.add_subcommand("sweep", "sweep one axis");
  add_common(sw, common);
  sw->add_option("--axis", axis,
                 "trainset_size, weight_decay, epsilon, keep_fraction, gamma, student_scaling "
                 "or temperature")
      ->required();
  sw->add_option("--values", values, "comma separated values")->required();
  sw->add_option("--reference", reference, "BAN results.csv for reference lines");
  auto* compare = app.add_subcommand("compare", "CE / LS / Beta / SD comparison");
  add_common(compare, common);
  auto* cross = app.add_subcommand("cross", "self vs cross distillation over two architectures");
  add_common(cross, common);
  auto* metrics = app.add_subcommand("metrics", "recompute test metrics from a checkpoint");
  add_common(metrics, common);
  metrics->add_option("--checkpoint", checkpoint, "DFCK1 checkpoint")->required();
  auto* plot = app.add_subcommand("plot", "results table to SVG");
  add_common(plot, common, false);
  plot->add_option("--results", results, "results.csv")->required();
  plot->add_option("--reference", reference, "BAN results.csv for reference lines");
  auto* calib = app.add_subcommand("calibrate-t", "temperature matching an effective label");
  add_common(calib, common);
  calib->add_option("--alpha", alpha, "one-hot weight (default experiment.sd_alpha)");
  calib->add_option("--g", g, "target effective label (default targets.g)");
  auto* ref = app.add_subcommand("config-reference", "print every config key");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0 && args.empty()) err << app.help();
    return 1;
  }

  try {
    if (train->parsed()) return cmd_train(common, out);
    if (ban->parsed()) return cmd_ban(common, out);
    if (sw->parsed()) return cmd_sweep(common, axis, values, reference, out);
    if (compare->parsed()) return cmd_compare(common, false, out);
    if (cross->parsed()) return cmd_compare(common, true, out);
    if (metrics->parsed()) return cmd_metrics(common, checkpoint, out);
    if (plot->parsed()) return cmd_plot(common, results, reference, out);
    if (calib->parsed()) return cmd_calibrate(common, alpha, g, out);
    if (ref->parsed()) {
      out << config_reference();
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace distlab
