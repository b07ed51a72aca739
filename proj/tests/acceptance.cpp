// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "distlab/checkpoint.hpp"
#include "distlab/cli.hpp"
#include "distlab/config.hpp"
#include "distlab/harness.hpp"
#include "distlab/losses.hpp"
#include "distlab/map_priors.hpp"
#include "distlab/metrics.hpp"
#include "distlab/results.hpp"
#include "distlab/targets.hpp"
#include "oracles.hpp"

using namespace distlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double fd_error(const std::function<LossResult(const Matrix&)>& f, Matrix z) {
  const auto analytic = f(z).gradient.data();
  const auto numeric = oracle::numeric_gradient([&] { return f(z).value; }, oracle::pointers(z));
  return oracle::relative_error(analytic, numeric);
}

Outcome gradients() {
  std::mt19937_64 rng(101);
  std::map<std::string, double> worst;
  const int instances = 25;
  for (int rep = 0; rep < instances; ++rep) {
    const std::size_t m = 1 + rep % 4, k = 2 + rep % 6;
    const auto z = oracle::random_matrix(m, k, rng, 2.0);
    const auto f = oracle::random_matrix(m, k, rng, 2.0);
    const auto y = oracle::random_labels(m, k, rng);
    const double t = std::uniform_real_distribution<double>(0.5, 5.0)(rng);
    const double beta = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto note = [&](const std::string& name, double e) { worst[name] = std::max(worst[name], e); };
    note("cce", fd_error([&](const Matrix& s) { return cce_loss(s, y); }, z));
    note("distill", fd_error([&](const Matrix& s) { return distill_loss(s, f, t); }, z));
    note("distill_scaled", fd_error([&](const Matrix& s) { return distill_loss(s, f, t, true); }, z));
    note("combined", fd_error([&](const Matrix& s) {
           return combined_loss(s, y, f, {LossKind::kCombined, alpha, t});
         }, z));
    note("ls", fd_error([&](const Matrix& s) { return ls_loss(s, y, beta); }, z));
    note("weighted_sd", fd_error([&](const Matrix& s) { return weighted_sd_loss(s, y, f, beta, t); }, z));
    note("pu", fd_error([&](const Matrix& s) { return pu_loss(s, y, beta); }, z));
  }
  Outcome o;
  for (const auto& [name, e] : worst) {
    o.pass = o.pass && e < 1e-4;
    o.detail += name + fmt("=%.1e ", e);
  }
  o.detail += fmt("(%g instances each)", instances);
  return o;
}

Outcome ls_identity() {
  std::mt19937_64 rng(202);
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = 2 + rng() % 50;
    const double beta = std::uniform_real_distribution<double>(0, 10)(rng);
    const auto z = oracle::random_matrix(1, k, rng, 3.0);
    const auto y = oracle::random_labels(1, k, rng);
    const double kd = static_cast<double>(k);
    Matrix t(1, k, beta / (kd * (1 + beta)));
    t(0, static_cast<std::size_t>(y[0])) = (kd + beta) / (kd * (1 + beta));
    worst = std::max(worst, std::abs(ls_loss(z, y, beta).value - (1 + beta) * soft_target_ce(z, t).value));
  }
  return {worst < 1e-10, fmt("max |diff| %.2e over 1000", worst)};
}

Outcome closed_form_map() {
  std::mt19937_64 rng(303);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha(k), w(k);
    std::vector<std::int64_t> counts(k);
    for (std::size_t i = 0; i < k; ++i) {
      alpha[i] = std::uniform_real_distribution<double>(1.0, 6.0)(rng);
      counts[i] = static_cast<std::int64_t>(rng() % 5);
    }
    counts[rng() % k] += 1;
    for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(counts[i]) + alpha[i] - 1;
    const auto got = dirichlet_map(CountVector(counts), DirichletPrior(alpha));
    const auto want = oracle::simplex_log_maximizer(w);
    for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return {worst < 1e-6, fmt("max |diff| %.2e over 200", worst)};
}

Outcome lambert_optimum() {
  double worst = 0;
  for (double beta : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    for (std::size_t k : {2u, 5u, 100u}) {
      const auto z = pu_optimum(beta, k);
      const double a = oracle::symmetric_min([&](const std::vector<double>& v) { return oracle::pu_objective(v, beta); }, k);
      worst = std::max(worst, std::abs(z[0] - a));
      worst = std::max(worst, std::abs(z[1] - (1 - a) / static_cast<double>(k - 1)));
    }
  }
  return {worst < 1e-6, fmt("max |diff| %.2e over 15 (beta,k)", worst)};
}

Outcome entropy_estimator() {
  const double want[3] = {0.0, std::log(0.5), 0.5 * std::log(2 * M_PI * M_E * 0.01)};
  double worst = 0;
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    std::vector<double> u(100000), h(100000), g(100000);
    std::uniform_real_distribution<double> unit(0, 1), half(0, 0.5);
    std::normal_distribution<double> normal(0, 0.1);
    for (auto& v : u) v = unit(rng);
    for (auto& v : h) v = half(rng);
    for (auto& v : g) v = normal(rng);
    worst = std::max(worst, std::abs(knn_entropy_1d(u, 3) - want[0]));
    worst = std::max(worst, std::abs(knn_entropy_1d(h, 3) - want[1]));
    worst = std::max(worst, std::abs(knn_entropy_1d(g, 3) - want[2]));
  }
  return {worst <= 0.02, fmt("max |error| %.4f over 3 x 10 seeds", worst)};
}

Outcome ece_oracle() {
  // Top class confidence c ~ U(1/k, 1); the label is the top class with
  // probability c, otherwise uniform over the rest.
  const std::size_t m = 100000, k = 10;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> conf(1.0 / k, 1.0), u(0, 1);
  Matrix p(m, k);
  std::vector<int> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t top = rng() % k;
    const double c = conf(rng);
    for (std::size_t j = 0; j < k; ++j) p(i, j) = j == top ? c : (1 - c) / (k - 1);
    std::size_t label = top;
    if (u(rng) >= c) label = (top + 1 + rng() % (k - 1)) % k;
    y[i] = static_cast<int>(label);
  }
  const double calibrated = ece(p, y, 15);

  const std::vector<int> y0{0, 1, 0};
  const double zero = ece(Matrix(3, 2, std::vector<double>{1, 0, 0, 1, 1, 0}), y0, 15);
  Matrix q(10, 2);
  std::vector<int> y1(10, 0);
  for (std::size_t i = 0; i < 10; ++i) q(i, 0) = 0.9, q(i, 1) = 0.1;
  y1[0] = y1[1] = 1;
  const double tenth = ece(q, y1, 15);
  const bool ok = calibrated < 0.01 && std::abs(zero) < 1e-12 && std::abs(tenth - 0.1) < 1e-12;
  return {ok, fmt("calibrated %.4f, hand cases %.3e and %.15f", calibrated, zero, tenth)};
}

Outcome alpha_rewrite() {
  // Relative per entry: alpha reaches ~1e6 here, beyond what an absolute 1e-12 can resolve.
  std::mt19937_64 rng(707);
  double worst = 0, largest = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = 2 + rng() % 20;
    const auto f = oracle::random_matrix(1, k, rng, 2.0);
    const double beta = std::uniform_real_distribution<double>(0.01, 5)(rng);
    const double t = std::uniform_real_distribution<double>(0.5, 5)(rng);
    const auto alpha = build_alpha(f.row(0), beta, t, 1.0);
    const double w = omega(f.row(0), t);
    const auto p = oracle::softmax(std::vector<double>(f.row(0).begin(), f.row(0).end()), t);
    for (std::size_t j = 0; j < k; ++j) {
      const double want = beta * w * p[j] + 1;
      worst = std::max(worst, std::abs(alpha[j] - want) / want);
      largest = std::max(largest, want);
    }
  }
  double flat = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 2 + rng() % 20;
    const auto f = oracle::random_matrix(1, k, rng, 5.0);
    const auto bar = normalize_alpha(build_alpha(f.row(0), 1.0, 1e6));
    for (double v : bar) flat = std::max(flat, std::abs(v - 1.0 / static_cast<double>(k)));
  }
  return {worst < 1e-12 && flat < 1e-5, fmt("rewrite max rel diff %.2e (largest entry %.3g), T=1e6 max |a - 1/k| %.2e", worst, largest, flat)};
}

ExperimentConfig config_of(const char* text) { return parse_config_text(text); }

// Gaussian mixture with heavy overlap, early stopping on a 20% validation split.
const char* kBanConfig = R"(
[dataset]
overlap = 0.88
n_train = 1000
n_test = 4000
[model]
hidden = [128]
[train]
epochs = 30
learning_rate = 0.02
validation_fraction = 0.2
[targets]
scheme = "distill"
alpha = 0.0
temperature = 1.0
[experiment]
repeats = 5
)";

struct BanRun {
  std::vector<BanResult> repeats;
  std::vector<SplitData> splits;
};

BanRun run_ban(const ExperimentConfig& c) {
  BanRun out;
  const Dataset data = load_dataset(c.dataset);
  for (int r = 0; r < c.repeats; ++r) {
    out.splits.push_back(prepare_split(data, c.train.validation_fraction, repeat_seed(c, r)));
    out.repeats.push_back(ban_sequence(c, out.splits.back(), r));
  }
  return out;
}

Outcome ban_trend(const BanRun& ban) {
  int apu = 0, cd = 0;
  double acc0 = 0, rest = 0;
  for (const auto& b : ban.repeats) {
    const auto& first = b.records.front();
    const auto& last = b.records.back();
    apu += last.train_avg_pred_uncertainty > first.train_avg_pred_uncertainty;
    cd += last.train_confidence_diversity > first.train_confidence_diversity;
    acc0 += first.test_accuracy;
    double s = 0;
    for (std::size_t g = 1; g < b.records.size(); ++g) s += b.records[g].test_accuracy;
    rest += s / static_cast<double>(b.records.size() - 1);
  }
  const double n = static_cast<double>(ban.repeats.size());
  acc0 /= n, rest /= n;
  const bool ok = apu >= 4 && cd >= 4 && rest >= acc0;
  return {ok, fmt("uncertainty up %g/5, diversity up %g/5, acc gen0 %.4f vs gens1-9 %.4f", apu, cd, acc0, rest)};
}

Outcome temperature_trend(const ExperimentConfig& c, const BanRun& ban) {
  const std::vector<double> temps{1, 1.5, 2, 2.5, 3, 4};
  int wins = 0;
  bool increasing = true;
  std::string per;
  for (std::size_t r = 0; r < ban.repeats.size(); ++r) {
    const auto& b = ban.repeats[r];
    const auto recs = temperature_sweep(c, ban.splits[r], b.models[0], temps, static_cast<int>(r));
    double best_t = 0, best_ban = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      best_t = std::max(best_t, recs[i].test_accuracy);
      if (i > 0) increasing = increasing && recs[i].train_avg_pred_uncertainty > recs[i - 1].train_avg_pred_uncertainty;
    }
    for (const auto& g : b.records) best_ban = std::max(best_ban, g.test_accuracy);
    wins += best_t >= best_ban;
    per += fmt(" %.4f/%.4f", best_t, best_ban);
  }
  return {increasing && wins >= 3, std::string("uncertainty strictly increasing: ") +
                                       (increasing ? "yes" : "no") +
                                       fmt("; sweep beats BAN %g/5 (best sweep/best BAN:", wins) + per + ")"};
}

// Larger network trained to convergence without early stopping, so CE overfits.
const char* kCompareConfig = R"(
[dataset]
overlap = 0.8
n_train = 2000
n_test = 4000
d = 10
[model]
hidden = [256]
[train]
epochs = 60
learning_rate = 0.05
early_stopping = false
weight_decay = 0.0
[targets]
g = 0.85
[experiment]
repeats = 5
)";

Outcome comparison_ordering() {
  const auto c = config_of(kCompareConfig);
  const auto summary = summarize(comparison_suite(c, load_dataset(c.dataset)));
  const auto& ce = summary.at(0);
  bool ok = ce.scheme == "ce";
  std::string detail;
  for (const auto& s : summary) {
    if (&s != &ce) ok = ok && s.accuracy_mean >= ce.accuracy_mean && s.ece_mean <= ce.ece_mean;
    detail += s.scheme + fmt(" acc %.4f ece %.4f; ", s.accuracy_mean, s.ece_mean);
  }
  return {ok, detail};
}

Outcome beta_mechanics() {
  const std::size_t m = 64;
  const int batches = 10000;
  std::mt19937_64 rng(1111);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  BetaSmoothingConfig cfg;
  cfg.a = 3.0;
  Batch batch{Matrix(m, 1), std::vector<int>(m, 0), {}};
  for (std::size_t i = 0; i < m; ++i) batch.indices.push_back(i);

  double mass = 0, random_rho = 0;
  int tie_free = 0, exact = 0;
  std::vector<double> conf(m);
  for (int b = 0; b < batches; ++b) {
    for (auto& c : conf) c = u(rng);
    cfg.rng_seed = static_cast<std::uint64_t>(b);
    cfg.use_ema_ranking = true;
    const auto ranked = beta_assignments(batch, conf, cfg);
    for (double v : ranked) mass += v;
    auto sorted = conf;
    std::sort(sorted.begin(), sorted.end());
    auto sb = ranked;
    std::sort(sb.begin(), sb.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() &&
        std::adjacent_find(sb.begin(), sb.end()) == sb.end()) {
      ++tie_free;
      exact += oracle::spearman(conf, ranked) == 1.0;
    }
    cfg.use_ema_ranking = false;
    random_rho += std::abs(oracle::spearman(conf, beta_assignments(batch, conf, cfg)));
  }
  mass /= static_cast<double>(batches) * m;
  random_rho /= batches;
  const double want = cfg.a / (cfg.a + 1);
  const bool ok = std::abs(mass - want) < 0.005 && exact == tie_free && random_rho < 0.2;
  return {ok, fmt("mean b %.5f vs %.5f, rho = 1 on %g", mass, want, exact) +
                  fmt("/%g tie-free batches, random mode mean |rho| %.4f", tie_free, random_rho)};
}

const char* kTrainsetConfig = R"(
[dataset]
overlap = 0.88
n_train = 4000
n_test = 4000
[model]
hidden = [128]
[train]
epochs = 30
learning_rate = 0.02
validation_fraction = 0.2
[targets]
scheme = "distill"
alpha = 0.0
temperature = 1.0
[experiment]
repeats = 3
)";

Outcome trainset_trend() {
  const auto c = config_of(kTrainsetConfig);
  const std::vector<double> sizes{250, 1000, 4000};
  const auto recs = sweep(c, load_dataset(c.dataset), SweepAxis::kTrainsetSize, sizes);
  std::map<int, std::vector<std::pair<double, double>>> by_repeat;
  for (const auto& r : recs) {
    if (r.scheme == "student") by_repeat[r.repeat].push_back({r.axis_value, r.relative_improvement});
  }
  int good = 0;
  std::string detail;
  for (auto& [rep, v] : by_repeat) {
    std::sort(v.begin(), v.end());
    bool mono = true;
    for (std::size_t i = 1; i < v.size(); ++i) mono = mono && v[i].second <= v[i - 1].second;
    good += mono;
    detail += fmt(" [%+.4f %+.4f %+.4f]", v[0].second, v[1].second, v[2].second);
  }
  return {good >= 2, fmt("nonincreasing in %g/3 seeds:", good) + detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli_main(args, out, err);
}

const char* kSmallConfig = R"(
[dataset]
k = 4
d = 6
n_train = 400
n_test = 400
overlap = 0.6
[model]
hidden = [32]
[train]
epochs = 8
learning_rate = 0.05
[targets]
scheme = "distill"
alpha = 0.3
temperature = 2.0
[experiment]
generations = 3
repeats = 2
seed = 9
)";

Outcome determinism(const fs::path& dir) {
  const fs::path cfg = dir / "small.toml";
  std::ofstream(cfg) << kSmallConfig;
  bool ok = true;
  std::string detail;
  for (std::string cmd : {"train", "ban", "compare"}) {
    const fs::path a = dir / (cmd + "_a"), b = dir / (cmd + "_b");
    fs::create_directories(a);
    fs::create_directories(b);
    const int ra = run_cli({cmd, "--config", cfg.string(), "--out", a.string()});
    const int rb = run_cli({cmd, "--config", cfg.string(), "--out", b.string()});
    const std::string ca = slurp(a / "results.csv"), cb = slurp(b / "results.csv");
    const bool same = ra == 0 && rb == 0 && !ca.empty() && ca == cb;
    ok = ok && same;
    detail += cmd + (same ? " identical; " : " DIFFERS; ");
  }
  return {ok, detail};
}

Outcome round_trips(const fs::path& dir) {
  auto c = config_of(kSmallConfig);
  c.targets.temperature = 0.1 + 0.2;  // not exactly representable in short decimal
  const bool config_ok = parse_config_text(serialize_config(c)) == c;

  const Dataset data = synth_dataset(c.dataset);
  const SplitData split = prepare_split(data, c.train.validation_fraction, c.seed);
  const auto run = train_run(c, c.hidden, split, {TargetSpec{}}, 3);
  const fs::path ck = dir / "model.dfck", ck2 = dir / "model2.dfck";
  save_checkpoint(ck, run.model);
  const MlpModel back = load_checkpoint(ck);
  save_checkpoint(ck2, back);
  const bool ckpt_ok = back == run.model && parameter_hash(back) == parameter_hash(run.model) &&
                       slurp(ck) == slurp(ck2);

  const auto ban = ban_sequence(c, split);
  ResultsTable table = to_table(ban.records, "ban", c);
  table.rows[0].confidence_diversity = std::nan("");
  table.rows[1].relative_improvement = 1.0 / 3.0;
  table.rows[2].axis = "temperature";
  const fs::path csv = dir / "results.csv";
  write_results(table, csv);
  const bool results_ok = read_results(csv) == table;
  return {config_ok && ckpt_ok && results_ok,
          std::string("checkpoint ") + (ckpt_ok ? "ok" : "BAD") + ", config " + (config_ok ? "ok" : "BAD") +
              ", results " + (results_ok ? "ok" : "BAD")};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "distlab_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto ban_config = config_of(kBanConfig);
  BanRun ban;

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradients},
      {2, ls_identity},
      {3, closed_form_map},
      {4, lambert_optimum},
      {5, entropy_estimator},
      {6, ece_oracle},
      {7, alpha_rewrite},
      {8, [&] { ban = run_ban(ban_config); return ban_trend(ban); }},
      {9, [&] { return temperature_trend(ban_config, ban); }},
      {10, comparison_ordering},
      {11, beta_mechanics},
      {12, trainset_trend},
      {13, [&] { return determinism(dir); }},
      {14, [&] { return round_trips(dir); }},
  };

  int failed = 0;
  for (const auto& [id, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d: %s  (%.1fs) %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
