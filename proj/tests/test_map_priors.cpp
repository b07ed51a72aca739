#include <doctest.h>

#include "distlab/losses.hpp"
#include "distlab/map_priors.hpp"
#include "oracles.hpp"

using namespace distlab;

TEST_CASE("dirichlet_map hand values") {
  const auto a = dirichlet_map(CountVector({1, 0}), DirichletPrior({1, 1}));
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.0));
  const auto b = dirichlet_map(CountVector({1, 0, 0}), DirichletPrior({2, 2, 2}));
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(dirichlet_map(CountVector({1, 0}), DirichletPrior({1, 0.5})), NonInteriorMapError);
  CHECK_THROWS(DirichletPrior({1, 0}));
  CHECK_THROWS(CountVector({0, 0}));
  CHECK_THROWS(CountVector({1, -1}));
}

TEST_CASE("dirichlet_map agrees with the simplex maximizer") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(1.0, 4.0);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t k = 2 + rep % 5;
    std::vector<double> alpha(k);
    std::vector<std::int64_t> counts(k);
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) {
      alpha[i] = u(rng);
      counts[i] = static_cast<std::int64_t>(rng() % 3);
    }
    counts[0] += 1;
    for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(counts[i]) + alpha[i] - 1;
    const auto got = dirichlet_map(CountVector(counts), DirichletPrior(alpha));
    const auto want = oracle::simplex_log_maximizer(w);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-6);
  }
}

TEST_CASE("pruned map drops negative coordinates") {
  std::size_t pruned = 0;
  const std::vector<double> alpha{1.0, 0.5, 3.0};
  const auto z = pruned_dirichlet_map(CountVector::one_hot(3, 0), alpha, &pruned);
  CHECK(pruned == 1);
  CHECK(z[1] == 0.0);
  CHECK(z[0] == doctest::Approx(1.0 / 3));
  CHECK(z[2] == doctest::Approx(2.0 / 3));
}

TEST_CASE("build_alpha and the rewritten form") {
  const std::vector<double> zero{0, 0};
  const auto a = build_alpha(zero, 1, 1, 1);
  CHECK(a[0] == doctest::Approx(2.0));
  CHECK(a[1] == doctest::Approx(2.0));

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = oracle::random_matrix(1, 6, rng, 2.0);
    const double beta = 0.5 + rep * 0.05, t = 0.5 + rep * 0.03;
    const auto alpha = build_alpha(f.row(0), beta, t, 1.0);
    const double w = omega(f.row(0), t);
    const auto p = oracle::softmax(std::vector<double>(f.row(0).begin(), f.row(0).end()), t);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(alpha[j] - (beta * w * p[j] + 1)) < 1e-12 * alpha[j]);
  }
  const auto f = oracle::random_matrix(1, 5, rng, 3.0);
  const auto hot = normalize_alpha(build_alpha(f.row(0), 1.0, 1e6));
  for (double v : hot) CHECK(std::abs(v - 0.2) < 1e-5);
  const std::vector<double> neg{5.0, 0.0};
  CHECK_THROWS_AS(build_alpha(neg, 1.0, 1.0, -2.0), std::domain_error);
}

TEST_CASE("normalize_alpha and omega") {
  auto n = normalize_alpha(DirichletPrior({2, 2}));
  CHECK(n[0] == doctest::Approx(0.5));
  n = normalize_alpha(DirichletPrior({1, 2, 3, 4}));
  CHECK(n[3] == doctest::Approx(0.4));
  const auto scaled = normalize_alpha(DirichletPrior({7, 14, 21, 28}));
  for (std::size_t i = 0; i < 4; ++i) CHECK(scaled[i] == doctest::Approx(n[i]).epsilon(1e-15));

  const std::vector<double> z{0, 0};
  CHECK(omega(z, 1) == doctest::Approx(2.0));
  const std::vector<double> l3{std::log(3.0)};
  CHECK(omega(l3, 1) == doctest::Approx(3.0));
  const std::vector<double> f{0.2, -1.0, 0.7}, g{1.7, 0.5, 2.2};
  CHECK(omega(g, 2.0) == doctest::Approx(omega(f, 2.0) * std::exp(1.5 / 2.0)).epsilon(1e-14));
  const std::vector<double> huge{1e6};
  CHECK_THROWS_AS(omega(huge, 1.0), std::overflow_error);
}

TEST_CASE("lambert_w") {
  CHECK(lambert_w(0.0) == 0.0);
  CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w(1.0) == doctest::Approx(0.5671432904).epsilon(1e-10));
  CHECK(lambert_w(-1 / std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
  for (double x : {1e-12, 1e-3, 0.3, 2.0, 50.0, 1e5, 1e200}) {
    const double w = lambert_w(x);
    CHECK(w == doctest::Approx(oracle::lambert_newton(x)).epsilon(1e-13));
  }
  for (double x : {-0.3, -0.1, -1e-4}) {
    const double w = lambert_w(x);
    CHECK(w * std::exp(w) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lambert_w(-0.5), std::domain_error);
}

TEST_CASE("pu and ls optima") {
  const auto z = pu_optimum(1.0, 2);
  CHECK(std::abs(z[0] - 0.78216) < 1e-4);
  CHECK(z[0] == doctest::Approx(1 / (lambert_w(std::exp(-1.0)) + 1)).epsilon(1e-12));
  CHECK(pu_optimum(1e-8, 5)[0] == doctest::Approx(1.0).epsilon(1e-6));
  const auto z7 = pu_optimum(0.7, 7);
  for (std::size_t i = 2; i < 7; ++i) CHECK(z7[i] == z7[1]);

  const auto l0 = ls_optimum(0.0, 4);
  CHECK(l0[0] == 1.0);
  const auto l = ls_optimum(2.0, 2);
  CHECK(l[0] == doctest::Approx(2.0 / 3));

  for (double beta : {0.3, 1.0, 3.0}) {
    for (std::size_t k : {2u, 3u, 6u}) {
      const auto md = oracle::simplex_min_md([&](const std::vector<double>& v) { return oracle::pu_objective(v, beta); }, k);
      CHECK(pu_optimum(beta, k)[0] == doctest::Approx(md[0]).epsilon(1e-4));
      const double a = oracle::symmetric_min([&](const std::vector<double>& v) { return oracle::ls_objective(v, beta); }, k);
      CHECK(ls_optimum(beta, k)[0] == doctest::Approx(a).epsilon(1e-7));
    }
  }
}
