#include <doctest.h>

#include "distlab/losses.hpp"
#include "distlab/targets.hpp"
#include "oracles.hpp"

using namespace distlab;

namespace {

Batch batch_of(std::size_t m, std::size_t d, std::mt19937_64& rng, std::size_t k = 3) {
  Batch b{oracle::random_matrix(m, d, rng), oracle::random_labels(m, k, rng), {}};
  for (std::size_t i = 0; i < m; ++i) b.indices.push_back(i);
  return b;
}

MlpModel zero_model(std::vector<std::size_t> dims) {
  auto m = init_model(dims, 0);
  for (auto& w : m.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
  return m;
}

}  // namespace

TEST_CASE("ls_targets") {
  const std::vector<int> y0{0};
  const Matrix t = ls_targets(y0, 0.15, 4);
  CHECK(t(0, 0) == doctest::Approx(0.85));
  CHECK(t(0, 3) == doctest::Approx(0.05));
  const std::vector<int> y1{1};
  const Matrix u = ls_targets(y1, 0.3, 2);
  CHECK(u(0, 0) == doctest::Approx(0.3));
  CHECK(u(0, 1) == doctest::Approx(0.7));
  const Matrix hot = ls_targets(y1, 0.0, 3);
  CHECK(hot(0, 1) == 1.0);
  CHECK(hot(0, 0) == 0.0);
}

TEST_CASE("mix_with_one_hot") {
  const std::vector<int> y{1};
  Matrix t(1, 2, 0.5);
  const Matrix m = mix_with_one_hot(t, y, 0.4);
  CHECK(m(0, 1) == doctest::Approx(0.7));
  CHECK(m(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("ema updates") {
  const std::vector<std::size_t> dims{2, 3, 2};
  const auto a = init_model(dims, 1);
  const auto b = init_model(dims, 2);
  CHECK_THROWS(EmaState(a, 1.0));
  CHECK_THROWS(EmaState(a, -0.1));

  EmaState instant(a, 0.0);
  instant.update(b);
  CHECK(instant.shadow() == b);

  EmaState slow(a, 0.5);
  double prev = std::abs(a.weights[0](0, 0) - b.weights[0](0, 0));
  for (int i = 0; i < 5; ++i) {
    slow.update(b);
    const double gap = std::abs(slow.shadow().weights[0](0, 0) - b.weights[0](0, 0));
    CHECK(gap == doctest::Approx(0.5 * prev).epsilon(1e-12));
    prev = gap;
  }
  CHECK(slow.updates() == 5);
}

TEST_CASE("ema confidences and self targets") {
  std::mt19937_64 rng(3);
  const Batch batch = batch_of(5, 2, rng);
  EmaState zero(zero_model({2, 3}), 0.9);
  for (double c : ema_confidences(zero, batch)) CHECK(c == doctest::Approx(1.0 / 3));
  const Matrix uni = ema_self_targets(zero, batch);
  for (double v : uni.data()) CHECK(v == doctest::Approx(1.0 / 3));

  auto m = zero_model({1, 2});
  m.biases[0][0] = std::log(3.0);
  Batch one{Matrix(1, 1), {0}, {0}};
  CHECK(ema_confidences(EmaState(m, 0.5), one)[0] == doctest::Approx(0.75));

  const std::vector<std::size_t> dims{2, 4, 3};
  EmaState s(init_model(dims, 9), 0.9);
  const Matrix t = ema_self_targets(s, batch);
  const Matrix logits = forward(s.shadow(), batch.features);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(is_probability_vector(t.row(i)));
    const auto p = softmax_t(logits.row(i), 1.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(t(i, j) == p[j]);
  }
  const std::vector<std::size_t> rev{4, 3, 2, 1, 0};
  const auto c = ema_confidences(s, batch);
  const auto cr = ema_confidences(s, select_rows(batch, rev));
  for (std::size_t i = 0; i < 5; ++i) CHECK(cr[i] == c[4 - i]);
}

TEST_CASE("solve_beta_a") {
  CHECK(solve_beta_a(0.85, 0.0) == doctest::Approx(0.85 / 0.15));
  CHECK(solve_beta_a(0.5, 0.0) == doctest::Approx(1.0));
  CHECK(solve_beta_a(0.85, 0.4) == doctest::Approx(3.0));
  CHECK_THROWS(solve_beta_a(0.3, 0.4));

  // Monte Carlo mean of Beta(a,1), drawn as U^(1/a).
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [g, mix] : {std::pair{0.85, 0.0}, std::pair{0.85, 0.4}}) {
    const double a = solve_beta_a(g, mix);
    double s = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) s += std::pow(u(rng), 1 / a);
    CHECK(std::abs(mix + (1 - mix) * s / n - g) < 1e-3);
  }
}

TEST_CASE("beta targets ranking") {
  std::mt19937_64 rng(5);
  const Batch batch = batch_of(16, 2, rng, 4);
  std::vector<double> conf(16);
  for (double& c : conf) c = std::uniform_real_distribution<double>(0.3, 1)(rng);
  BetaSmoothingConfig cfg;
  cfg.a = 3.0;
  cfg.rng_seed = 11;
  const auto b = beta_assignments(batch, conf, cfg);
  CHECK(oracle::spearman(conf, b) == doctest::Approx(1.0));
  const Matrix t = beta_targets(batch, conf, cfg, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(is_probability_vector(t.row(i)));
    CHECK(t(i, static_cast<std::size_t>(batch.labels[i])) == doctest::Approx(b[i]));
  }
  CHECK(beta_assignments(batch, conf, cfg) == b);

  cfg.a = 1e6;
  for (double v : beta_assignments(batch, conf, cfg)) CHECK(v > 0.9999);

  Batch one = select_rows(batch, std::vector<std::size_t>{3});
  const std::vector<double> c1{0.4};
  cfg.a = 2.0;
  const double ranked = beta_assignments(one, c1, cfg)[0];
  cfg.use_ema_ranking = false;
  CHECK(beta_assignments(one, c1, cfg)[0] == ranked);
}

TEST_CASE("pruned teacher targets") {
  const Matrix f(1, 4, std::vector<double>{3, 2, 1, 0});
  const Matrix t = pruned_teacher_targets(f, 1.0, 0.5);
  const double e = std::exp(1.0);
  CHECK(t(0, 0) == doctest::Approx(e / (1 + e)));
  CHECK(t(0, 1) == doctest::Approx(1 / (1 + e)));
  CHECK(t(0, 2) == 0.0);
  CHECK(t(0, 3) == 0.0);

  std::mt19937_64 rng(6);
  const auto g = oracle::random_matrix(5, 7, rng, 2.0);
  const Matrix full = pruned_teacher_targets(g, 1.7, 1.0);
  const Matrix ref = softmax_rows(g, 1.7);
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(full.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-15));

  const Matrix part = pruned_teacher_targets(g, 1.7, 0.4);
  CHECK(kept_class_count(0.4, 7) == 3);
  for (std::size_t i = 0; i < 5; ++i) {
    std::size_t kept = 0;
    double kept_mass = 0;
    for (std::size_t j = 0; j < 7; ++j) {
      if (part(i, j) > 0) ++kept, kept_mass += ref(i, j);
    }
    CHECK(kept == 3);
    for (std::size_t j = 0; j < 7; ++j) {
      if (part(i, j) > 0) CHECK(part(i, j) == doctest::Approx(ref(i, j) / kept_mass).epsilon(1e-12));
    }
  }
  CHECK(kept_class_count(0.5, 10) == 5);
  CHECK(kept_class_count(0.01, 10) == 1);
}

TEST_CASE("dirichlet map targets") {
  std::mt19937_64 rng(7);
  const auto f = oracle::random_matrix(4, 5, rng);
  const auto y = oracle::random_labels(4, 5, rng);
  const Matrix t = dirichlet_map_targets(f, y, 2.0, 1.5, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(is_probability_vector(t.row(i)));
    // gamma = 1: z proportional to onehot + beta * omega * softmax(f/T)
    const auto p = oracle::softmax(std::vector<double>(f.row(i).begin(), f.row(i).end()), 1.5);
    double w = 0;
    for (double v : f.row(i)) w += std::exp(v / 1.5);
    std::vector<double> raw(5);
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += (raw[j] = 2.0 * w * p[j] + (static_cast<int>(j) == y[i] ? 1.0 : 0.0));
    for (std::size_t j = 0; j < 5; ++j) CHECK(t(i, j) == doctest::Approx(raw[j] / s).epsilon(1e-12));
  }
}
