#include "distlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "distlab/losses.hpp"
#include "distlab/version.hpp"

namespace distlab {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

double beta_shape(const TargetSpec& t) {
  return t.beta_a > 0.0 ? t.beta_a : solve_beta_a(t.g, t.alpha);
}

// Loss and logit gradient of one minibatch under the configured scheme.
LossResult scheme_loss(const TargetSpec& t, const Matrix& logits, const Batch& batch,
                       const Matrix& teacher_logits, const EmaState& ema, bool ema_warm,
                       std::size_t k, std::uint64_t step_seed) {
  switch (t.scheme) {
    case TargetScheme::kCe:
      return cce_loss(logits, batch.labels);
    case TargetScheme::kLabelSmoothing:
      return soft_target_ce(logits, ls_targets(batch.labels, t.epsilon, k));
    case TargetScheme::kLsMap:
      return ls_loss(logits, batch.labels, t.beta);
    case TargetScheme::kPredUncertainty:
      return pu_loss(logits, batch.labels, t.beta);
    case TargetScheme::kDistill: {
      LossSpec spec;
      spec.kind = LossKind::kCombined;
      spec.alpha = t.alpha;
      spec.temperature = t.temperature;
      spec.student_scaling = t.student_scaling;
      return combined_loss(logits, batch.labels, teacher_logits, spec);
    }
    case TargetScheme::kBeta: {
      // The shadow is uninformative until it has seen an epoch of updates.
      std::vector<double> conf;
      if (ema_warm) {
        conf = ema_confidences(ema, batch);
      } else {
        const Matrix p = softmax_rows(logits);
        for (std::size_t i = 0; i < p.rows(); ++i) conf.push_back(p(i, argmax(p.row(i))));
      }
      BetaSmoothingConfig cfg;
      cfg.a = beta_shape(t);
      cfg.alpha_mix = t.alpha;
      cfg.g = t.g;
      cfg.use_ema_ranking = t.use_ema_ranking;
      cfg.rng_seed = step_seed;
      return soft_target_ce(logits,
                            mix_with_one_hot(beta_targets(batch, conf, cfg, k), batch.labels, t.alpha));
    }
    case TargetScheme::kEmaSelf: {
      const Matrix soft = ema_warm ? ema_self_targets(ema, batch) : softmax_rows(logits);
      return soft_target_ce(logits, mix_with_one_hot(soft, batch.labels, t.alpha));
    }
    case TargetScheme::kPruned:
      return soft_target_ce(
          logits, mix_with_one_hot(pruned_teacher_targets(teacher_logits, t.temperature,
                                                          t.keep_fraction),
                                   batch.labels, t.alpha));
    case TargetScheme::kWeightedSd:
      return weighted_sd_loss(logits, batch.labels, teacher_logits, t.beta, t.temperature);
    case TargetScheme::kDirichletMap:
      return soft_target_ce(logits, dirichlet_map_targets(teacher_logits, batch.labels, t.beta,
                                                          t.temperature, t.gamma));
  }
  throw std::invalid_argument("train_run: unknown target scheme");
}

double mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

SchemeRecord make_record(const std::string& scheme, int repeat, std::uint64_t seed,
                         const TargetSpec& t, double smoothing, const MetricsRecord& test,
                         const SplitData& split, double wall) {
  SchemeRecord r;
  r.scheme = scheme;
  r.repeat = repeat;
  r.seed = seed;
  r.temperature = t.temperature;
  r.alpha = t.alpha;
  r.smoothing = smoothing;
  r.test = test;
  r.split_hash = split.split_hash;
  r.wall_seconds = wall;
  return r;
}

TargetSpec ce_spec() {
  TargetSpec t;
  t.scheme = TargetScheme::kCe;
  t.alpha = 1.0;
  t.temperature = 1.0;
  return t;
}

// Student scheme for teacher-based experiments: the configured one when it
// uses a teacher, plain distillation otherwise.
TargetSpec student_spec(const ExperimentConfig& config) {
  TargetSpec t = config.targets;
  if (!needs_teacher(t.scheme)) t.scheme = TargetScheme::kDistill;
  return t;
}

double smoothing_of(const TargetSpec& t) {
  switch (t.scheme) {
    case TargetScheme::kLabelSmoothing: return t.epsilon;
    case TargetScheme::kBeta: return t.g;
    case TargetScheme::kLsMap:
    case TargetScheme::kPredUncertainty:
    case TargetScheme::kWeightedSd:
    case TargetScheme::kDirichletMap: return t.beta;
    case TargetScheme::kPruned: return t.keep_fraction;
    default: return 0.0;
  }
}

}  // namespace

SplitData prepare_split(const Dataset& data, double validation_fraction, std::uint64_t seed) {
  auto split = split_validation(data.train, validation_fraction, seed);
  SplitData s;
  s.train = std::move(split.train);
  s.validation = std::move(split.validation);
  s.test = data.test;
  s.num_classes = data.num_classes;
  s.split_hash = split.hash;
  return s;
}

std::uint64_t repeat_seed(const ExperimentConfig& config, int repeat) {
  return config.seed + 1000ULL * static_cast<std::uint64_t>(repeat);
}

std::vector<std::size_t> layer_dims_for(const SplitData& data, std::span<const std::size_t> hidden) {
  std::vector<std::size_t> dims;
  dims.push_back(data.train.features.cols());
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(data.num_classes);
  return dims;
}

MetricsRecord evaluate_model(const MlpModel& model, const Batch& batch,
                             const ExperimentConfig& config, double temperature) {
  const Matrix probs = softmax_rows(forward(model, batch.features), temperature);
  return evaluate_predictions(probs, batch.labels, {config.knn_k, config.ece_bins});
}

TrainResult train_run(const ExperimentConfig& config, std::span<const std::size_t> hidden,
                      const SplitData& data, const TargetsSource& source, std::uint64_t seed) {
  validate_config(config);
  validate_batch(data.train);
  const TargetSpec& t = source.spec;
  if (needs_teacher(t.scheme) && source.teacher == nullptr) {
    throw ConfigError(std::string("targets.scheme: \"") + scheme_name(t.scheme) +
                      "\" needs a teacher model");
  }
  if (config.train.early_stopping && data.validation.size() == 0) {
    throw ConfigError("train.early_stopping: no validation data");
  }
  const Stopwatch clock(config.record_wall_time);
  const std::size_t k = data.num_classes;
  const auto dims = layer_dims_for(data, hidden);

  MlpModel model = init_model(dims, seed);
  OptimizerState opt = make_optimizer(model, config.train.learning_rate, config.train.momentum,
                                      config.train.weight_decay, config.train.epochs);
  EmaState ema(model, config.train.ema_decay);

  Matrix teacher_all;
  if (source.teacher != nullptr) {
    if (source.teacher->num_classes() != k) {
      throw std::invalid_argument("train_run: teacher predicts a different number of classes");
    }
    teacher_all = forward(*source.teacher, data.train.features);
  }
  const Batch& monitor = data.validation.size() > 0 ? data.validation : data.train;

  std::mt19937_64 shuffle_rng(splitmix64(seed ^ 0x5348554646ULL));
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = config.train.batch_size;

  TrainResult result{model, ema, {}, 0, 0.0};
  double best_nll = std::numeric_limits<double>::infinity();
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    opt.epoch = epoch;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Batch batch = select_rows(data.train, rows);
      const Matrix logits = forward(model, batch.features);
      Matrix teacher_logits;
      if (source.teacher != nullptr) teacher_logits = gather_rows(teacher_all, batch.indices);
      const LossResult loss = scheme_loss(t, logits, batch, teacher_logits, ema, epoch > 0, k,
                                          splitmix64(seed + 0x9e37ULL * (step + 1)));
      sgd_step(model, backward(model, batch, loss.gradient), opt);
      ema.update(model);
      ++step;
    }
    const MetricsRecord rec = evaluate_model(model, monitor, config);
    result.history.push_back(rec);
    if (!config.train.early_stopping || rec.nll < best_nll) {
      best_nll = rec.nll;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  result.ema = std::move(ema);
  result.wall_seconds = clock.seconds();
  return result;
}

BanResult ban_sequence(const ExperimentConfig& config, const SplitData& data, int repeat) {
  if (config.generations < 2) {
    throw ConfigError("experiment.generations: a BAN sequence needs at least 2 generations");
  }
  const std::uint64_t base = repeat_seed(config, repeat);
  const TargetSpec student = student_spec(config);
  BanResult out;
  for (int gen = 0; gen < config.generations; ++gen) {
    const std::uint64_t seed = base + static_cast<std::uint64_t>(gen);
    TargetsSource src{gen == 0 ? ce_spec() : student,
                      gen == 0 ? nullptr : &out.models.back()};
    const auto run = train_run(config, config.hidden, data, src, seed);
    const MlpModel& teacher = gen == 0 ? run.model : out.models.back();
    const double t_teacher = gen == 0 ? 1.0 : student.temperature;
    const auto teacher_train = evaluate_model(teacher, data.train, config, t_teacher);
    const auto test = evaluate_model(run.model, data.test, config);

    GenerationRecord rec;
    rec.generation = gen;
    rec.temperature = gen == 0 ? 1.0 : student.temperature;
    rec.alpha = gen == 0 ? 1.0 : student.alpha;
    rec.test_accuracy = test.accuracy;
    rec.test_nll = test.nll;
    rec.test_ece = test.ece;
    rec.train_avg_pred_uncertainty = teacher_train.avg_pred_uncertainty;
    rec.train_confidence_diversity = teacher_train.confidence_diversity;
    rec.train_degenerate_fraction = teacher_train.degenerate_fraction;
    rec.wall_seconds = run.wall_seconds;
    rec.seed = seed;
    out.records.push_back(rec);
    out.models.push_back(run.model);
  }
  return out;
}

std::vector<GenerationRecord> temperature_sweep(const ExperimentConfig& config,
                                                const SplitData& data, const MlpModel& teacher,
                                                std::span<const double> temperatures,
                                                int repeat) {
  if (temperatures.empty()) throw ConfigError("temperature sweep: no temperatures given");
  const std::uint64_t seed = repeat_seed(config, repeat) + 1;
  std::vector<GenerationRecord> out;
  for (double temp : temperatures) {
    TargetSpec spec = student_spec(config);
    spec.scheme = TargetScheme::kDistill;
    spec.temperature = temp;
    const auto run = train_run(config, config.hidden, data, {spec, &teacher}, seed);
    const auto teacher_train = evaluate_model(teacher, data.train, config, temp);
    const auto test = evaluate_model(run.model, data.test, config);
    GenerationRecord rec;
    rec.generation = 1;
    rec.temperature = temp;
    rec.alpha = spec.alpha;
    rec.test_accuracy = test.accuracy;
    rec.test_nll = test.nll;
    rec.test_ece = test.ece;
    rec.train_avg_pred_uncertainty = teacher_train.avg_pred_uncertainty;
    rec.train_confidence_diversity = teacher_train.confidence_diversity;
    rec.train_degenerate_fraction = teacher_train.degenerate_fraction;
    rec.wall_seconds = run.wall_seconds;
    rec.seed = seed;
    out.push_back(rec);
  }
  return out;
}

double mean_effective_label(const Matrix& teacher_logits, std::span<const int> labels,
                            double alpha, double temperature) {
  const Matrix p = softmax_rows(teacher_logits, temperature);
  double s = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) s += p(i, static_cast<std::size_t>(labels[i]));
  return alpha + (1.0 - alpha) * s / static_cast<double>(p.rows());
}

double matched_smoothing_calibration(const MlpModel& teacher, const Batch& train, double alpha,
                                     double g) {
  validate_batch(train);
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("calibration: alpha must be in [0,1)");
  }
  if (!(g > alpha && g < 1.0)) throw std::invalid_argument("calibration: g must be in (alpha, 1)");
  const Matrix logits = forward(teacher, train.features);
  const auto f = [&](double log_t) {
    return mean_effective_label(logits, train.labels, alpha, std::exp(log_t)) - g;
  };
  double lo = std::log(1e-3);
  double hi = std::log(1e6);
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo * f_hi > 0.0) {
    throw std::runtime_error("calibration: effective label " + std::to_string(g) +
                             " is not reachable for T in [1e-3, 1e6]");
  }
  if (f_lo == 0.0) return std::exp(lo);
  const bool decreasing = f_lo > 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if (std::abs(v) < 1e-9 || hi - lo < 1e-14) return std::exp(mid);
    if ((v > 0.0) == decreasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

std::vector<SchemeSummary> summarize(std::span<const SchemeRecord> records) {
  std::vector<SchemeSummary> out;
  std::vector<std::vector<double>> acc, ece_v;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SchemeSummary& s) { return s.scheme == r.scheme; });
    if (it == out.end()) {
      out.push_back({r.scheme});
      acc.emplace_back();
      ece_v.emplace_back();
      it = out.end() - 1;
    }
    const auto i = static_cast<std::size_t>(it - out.begin());
    acc[i].push_back(r.test.accuracy);
    ece_v[i].push_back(r.test.ece);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].runs = acc[i].size();
    out[i].accuracy_mean = mean(acc[i]);
    out[i].accuracy_std = sample_std(acc[i]);
    out[i].ece_mean = mean(ece_v[i]);
    out[i].ece_std = sample_std(ece_v[i]);
  }
  return out;
}

std::vector<SchemeRecord> comparison_suite(const ExperimentConfig& config, const Dataset& data) {
  validate_config(config);
  std::vector<SchemeRecord> out;
  const double g = config.targets.g;
  for (int r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = repeat_seed(config, r);
    const SplitData split = prepare_split(data, config.train.validation_fraction, seed);
    const auto test_of = [&](const MlpModel& m) { return evaluate_model(m, split.test, config); };

    const TargetSpec ce = ce_spec();
    const auto ce_run = train_run(config, config.hidden, split, {ce, nullptr}, seed);
    out.push_back(make_record("ce", r, seed, ce, 0.0, test_of(ce_run.model), split,
                              ce_run.wall_seconds));

    TargetSpec ls = config.targets;
    ls.scheme = TargetScheme::kLabelSmoothing;
    ls.alpha = 1.0;
    ls.temperature = 1.0;
    const auto ls_run = train_run(config, config.hidden, split, {ls, nullptr}, seed);
    out.push_back(make_record("ls", r, seed, ls, ls.epsilon, test_of(ls_run.model), split,
                              ls_run.wall_seconds));

    TargetSpec beta = config.targets;
    beta.scheme = TargetScheme::kBeta;
    beta.alpha = config.beta_alpha;
    beta.temperature = 1.0;
    beta.g = g;
    beta.beta_a = solve_beta_a(g, config.beta_alpha);
    const auto beta_run = train_run(config, config.hidden, split, {beta, nullptr}, seed);
    out.push_back(make_record("beta", r, seed, beta, g, test_of(beta_run.model), split,
                              beta_run.wall_seconds));

    TargetSpec sd = config.targets;
    sd.scheme = TargetScheme::kDistill;
    sd.alpha = config.sd_alpha;
    sd.temperature = matched_smoothing_calibration(ce_run.model, split.train, sd.alpha, g);
    sd.student_scaling = false;
    const auto sd_run = train_run(config, config.hidden, split, {sd, &ce_run.model}, seed);
    out.push_back(make_record("sd", r, seed, sd, g, test_of(sd_run.model), split,
                              sd_run.wall_seconds));
  }
  return out;
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kTrainsetSize: return "trainset_size";
    case SweepAxis::kWeightDecay: return "weight_decay";
    case SweepAxis::kEpsilon: return "epsilon";
    case SweepAxis::kKeepFraction: return "keep_fraction";
    case SweepAxis::kGamma: return "gamma";
    case SweepAxis::kStudentScaling: return "student_scaling";
    case SweepAxis::kTemperature: return "temperature";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  for (auto a : {SweepAxis::kTrainsetSize, SweepAxis::kWeightDecay, SweepAxis::kEpsilon,
                 SweepAxis::kKeepFraction, SweepAxis::kGamma, SweepAxis::kStudentScaling,
                 SweepAxis::kTemperature}) {
    if (name == axis_name(a)) return a;
  }
  throw ConfigError("sweep --axis: unknown axis '" + name + "'");
}

std::vector<SchemeRecord> sweep(const ExperimentConfig& config, const Dataset& data,
                                SweepAxis axis, std::span<const double> values) {
  validate_config(config);
  if (values.empty()) throw ConfigError("sweep --values: at least one value required");
  const std::string axis_str = axis_name(axis);
  std::vector<SchemeRecord> out;

  const auto tag = [&](SchemeRecord rec, double value, double teacher_acc) {
    rec.axis = axis_str;
    rec.axis_value = value;
    rec.teacher_accuracy = teacher_acc;
    rec.relative_improvement =
        teacher_acc > 0.0 ? (rec.test.accuracy - teacher_acc) / teacher_acc : 0.0;
    out.push_back(std::move(rec));
  };

  if (axis == SweepAxis::kEpsilon) {
    for (double eps : values) {
      ExperimentConfig c = config;
      c.targets.epsilon = eps;
      c.targets.g = 1.0 - eps;
      validate_config(c);
      for (auto& rec : comparison_suite(c, data)) tag(std::move(rec), eps, 0.0);
    }
    return out;
  }

  for (int r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = repeat_seed(config, r);
    const TargetSpec ce = ce_spec();

    if (axis == SweepAxis::kTrainsetSize) {
      for (double v : values) {
        if (!(v >= 1.0) || v != std::floor(v) || v > static_cast<double>(data.train.size())) {
          throw ConfigError("sweep --values: training set size " + std::to_string(v) +
                            " is not an integer in [1, n_train]");
        }
        Dataset sub{subsample(data.train, static_cast<std::size_t>(v), seed), data.test,
                    data.num_classes};
        const SplitData split = prepare_split(sub, config.train.validation_fraction, seed);
        const auto teacher = train_run(config, config.hidden, split, {ce, nullptr}, seed);
        const auto t_test = evaluate_model(teacher.model, split.test, config);
        tag(make_record("teacher", r, seed, ce, 0.0, t_test, split, teacher.wall_seconds), v,
            t_test.accuracy);
        const TargetSpec st = student_spec(config);
        const auto student = train_run(config, config.hidden, split, {st, &teacher.model}, seed + 1);
        tag(make_record("student", r, seed + 1, st, smoothing_of(st),
                        evaluate_model(student.model, split.test, config), split,
                        student.wall_seconds),
            v, t_test.accuracy);
      }
      continue;
    }

    const SplitData split = prepare_split(data, config.train.validation_fraction, seed);
    const auto teacher = train_run(config, config.hidden, split, {ce, nullptr}, seed);
    const auto t_test = evaluate_model(teacher.model, split.test, config);

    for (double v : values) {
      tag(make_record("teacher", r, seed, ce, 0.0, t_test, split, teacher.wall_seconds), v,
          t_test.accuracy);
      ExperimentConfig c = config;
      std::vector<TargetSpec> students;
      TargetSpec st = student_spec(config);
      switch (axis) {
        case SweepAxis::kWeightDecay:
          c.train.weight_decay = v;
          students.push_back(st);
          break;
        case SweepAxis::kKeepFraction:
          st.scheme = TargetScheme::kPruned;
          st.keep_fraction = v;
          students.push_back(st);
          break;
        case SweepAxis::kGamma:
          st.scheme = TargetScheme::kDirichletMap;
          st.gamma = v;
          students.push_back(st);
          break;
        case SweepAxis::kStudentScaling:
          st.scheme = TargetScheme::kDistill;
          st.temperature = v;
          st.student_scaling = false;
          students.push_back(st);
          st.student_scaling = true;
          students.push_back(st);
          break;
        case SweepAxis::kTemperature:
          st.scheme = TargetScheme::kDistill;
          st.temperature = v;
          students.push_back(st);
          break;
        default:
          break;
      }
      validate_config(c);
      for (const auto& s : students) {
        const auto student = train_run(c, c.hidden, split, {s, &teacher.model}, seed + 1);
        std::string name = "student";
        if (axis == SweepAxis::kStudentScaling) {
          name = s.student_scaling ? "scale_both" : "scale_teacher";
        }
        const double smoothing =
            axis == SweepAxis::kWeightDecay ? c.train.weight_decay : smoothing_of(s);
        tag(make_record(name, r, seed + 1, s, smoothing,
                        evaluate_model(student.model, split.test, c), split,
                        student.wall_seconds),
            v, t_test.accuracy);
      }
    }
  }
  return out;
}

std::vector<SchemeRecord> cross_distill(const ExperimentConfig& config, const Dataset& data) {
  validate_config(config);
  std::vector<SchemeRecord> out;
  const TargetSpec ce = ce_spec();
  for (int r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = repeat_seed(config, r);
    const SplitData split = prepare_split(data, config.train.validation_fraction, seed);
    const auto teacher_a = train_run(config, config.hidden, split, {ce, nullptr}, seed);
    const auto teacher_b = train_run(config, config.hidden_b, split, {ce, nullptr}, seed);

    const auto matched = [&](const MlpModel& teacher) {
      TargetSpec s = config.targets;
      s.scheme = TargetScheme::kDistill;
      s.alpha = config.sd_alpha;
      s.student_scaling = false;
      s.temperature = matched_smoothing_calibration(teacher, split.train, s.alpha, config.targets.g);
      return s;
    };
    const TargetSpec from_a = matched(teacher_a.model);
    const TargetSpec from_b = matched(teacher_b.model);

    struct Pair {
      const char* name;
      const TargetSpec* spec;
      const MlpModel* teacher;
      const std::vector<std::size_t>* hidden;
    };
    const Pair pairs[] = {
        {"sd_a", &from_a, &teacher_a.model, &config.hidden},
        {"sd_b", &from_b, &teacher_b.model, &config.hidden_b},
        {"cd_a_to_b", &from_a, &teacher_a.model, &config.hidden_b},
        {"cd_b_to_a", &from_b, &teacher_b.model, &config.hidden},
    };
    for (const auto& p : pairs) {
      const auto run = train_run(config, *p.hidden, split, {*p.spec, p.teacher}, seed + 1);
      out.push_back(make_record(p.name, r, seed + 1, *p.spec, config.targets.g,
                                evaluate_model(run.model, split.test, config), split,
                                run.wall_seconds));
    }
  }
  return out;
}

ResultsTable to_table(std::span<const GenerationRecord> records, const std::string& scheme,
                      const ExperimentConfig& config) {
  ResultsTable table;
  const std::string hash = config_hash(config);
  for (const auto& g : records) {
    ResultRow row;
    row.scheme = scheme;
    row.generation = g.generation;
    row.seed = g.seed;
    row.temperature = g.temperature;
    row.alpha = g.alpha;
    row.accuracy = g.test_accuracy;
    row.nll = g.test_nll;
    row.ece = g.test_ece;
    row.avg_pred_uncertainty = g.train_avg_pred_uncertainty;
    row.confidence_diversity = g.train_confidence_diversity;
    row.degenerate_fraction = g.train_degenerate_fraction;
    row.wall_seconds = g.wall_seconds;
    row.config_hash = hash;
    row.artifact_version = kArtifactVersion;
    table.rows.push_back(row);
  }
  return table;
}

ResultsTable to_table(std::span<const SchemeRecord> records, const ExperimentConfig& config) {
  ResultsTable table;
  const std::string hash = config_hash(config);
  for (const auto& r : records) {
    ResultRow row;
    row.scheme = r.scheme;
    row.generation = r.repeat;
    row.seed = r.seed;
    row.temperature = r.temperature;
    row.alpha = r.alpha;
    row.smoothing = r.smoothing;
    row.accuracy = r.test.accuracy;
    row.nll = r.test.nll;
    row.ece = r.test.ece;
    row.avg_pred_uncertainty = r.test.avg_pred_uncertainty;
    row.confidence_diversity = r.test.confidence_diversity;
    row.degenerate_fraction = r.test.degenerate_fraction;
    row.wall_seconds = r.wall_seconds;
    row.config_hash = hash;
    row.axis = r.axis;
    row.axis_value = r.axis_value;
    row.relative_improvement = r.relative_improvement;
    row.artifact_version = kArtifactVersion;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace distlab
