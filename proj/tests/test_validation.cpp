#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "klest/estimator.hpp"
#include "klest/validation.hpp"

using namespace klest;

namespace {

// Direct long double evaluation of S_n / S_{n/2} for the summability series.
double direct_growth(const Vector& s, const Vector& c, double mu) {
  long double full = 0, half = 0;
  const Eigen::Index n = s.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    full += (long double)c[i] * c[i] / std::pow((long double)s[i], 2.0L + 4.0L * mu);
    if (i + 1 == n / 2) half = full;
  }
  return double(full / half);
}

}  // namespace

TEST_CASE("tikhonov closed form") {
  const auto one = LinearOperator<double>::diagonal(Vector{{1.0}});
  CHECK(tikhonov_solve(one, Vector{{1.0}}, 1.0)[0] == doctest::Approx(0.5));

  const auto p = make_power_law(200, 2, 2);
  double prev = INFINITY;
  for (double alpha : {1.0, 10.0, 100.0}) {
    const double n = tikhonov_solve(p.op, p.y_clean, alpha).norm();
    CHECK(n < prev);
    prev = n;
  }
  CHECK_THROWS_AS(tikhonov_solve(one, Vector{{1.0}}, 0.0), ConfigError);
  CHECK_THROWS_AS(tikhonov_solve(one, Vector{{1.0, 2.0}}, 1.0), DimensionError);
}

TEST_CASE("tikhonov generic solve matches the closed form") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 5; ++t) {
    Vector s(40), y(40);
    for (auto& v : s) v = u(rng);
    std::sort(s.begin(), s.end(), std::greater<>());
    for (auto& v : y) v = u(rng) - 0.5;
    const double alpha = u(rng) * 0.1;
    const auto diag = LinearOperator<double>::diagonal(s);
    const auto dense = LinearOperator<double>::dense(diag.to_dense());
    const Vector a = tikhonov_solve(diag, y, alpha);
    const Vector oracle = (s.array() * y.array() / (s.array().square() + alpha)).matrix();
    CHECK((a - oracle).norm() <= 1e-12 * oracle.norm());

    // Direct SPD solve of the normal equations.
    const Matrix n = dense.matrix().transpose() * dense.matrix() + alpha * Matrix::Identity(40, 40);
    const Vector rhs = dense.matrix().transpose() * y;
    const Vector direct = n.llt().solve(rhs);
    CHECK((direct - oracle).norm() <= 1e-10 * oracle.norm());

    // The iterative path meets its residual target; the forward error is
    // bounded by the condition number times that target.
    const Vector b = tikhonov_solve(dense, y, alpha);
    CHECK((n * b - rhs).norm() <= 1e-10 * rhs.norm());
    const double cond = (s[0] * s[0] + alpha) / (s[39] * s[39] + alpha);
    CHECK((b - oracle).norm() <= 1e-10 * cond * oracle.norm());
  }

  Matrix m{{2.0, 1.0}, {0.0, 1.0}};
  const Vector y{{1.0, 3.0}};
  const double alpha = 0.3;
  const Vector oracle = (m.transpose() * m + alpha * Matrix::Identity(2, 2)).ldlt().solve(m.transpose() * y);
  CHECK((tikhonov_solve(LinearOperator<double>::dense(m), y, alpha) - oracle).norm() <= 1e-10);
}

TEST_CASE("tikhonov reports conjugate gradient failure") {
  const auto p = make_deriv2(64);
  CgConfig cg;
  cg.max_iters = 1;
  CHECK_THROWS_AS(tikhonov_solve(p.op, p.y_clean, 1e-8, cg), ConvergenceError);
}

TEST_CASE("a-priori parameter") {
  CHECK(apriori_alpha(0.01, 0.5) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(apriori_alpha(0.01, 0.375) == doctest::Approx(std::pow(10.0, -16.0 / 7.0)).epsilon(1e-14));
  CHECK(apriori_alpha(0.01, 0.375) == doctest::Approx(5.1795e-3).epsilon(1e-4));
  CHECK(apriori_alpha(0.0, 0.375) == 0.0);
  CHECK(apriori_alpha(0.001, 0.375) < apriori_alpha(0.01, 0.375));
  CHECK_THROWS_AS(apriori_alpha(0.01, 0.0), ConfigError);
  CHECK_THROWS_AS(apriori_alpha(-1.0, 0.3), ConfigError);
}

TEST_CASE("log-spaced levels") {
  const auto l = log_spaced_levels(0.001, 0.1, 10);
  REQUIRE(l.size() == 10);
  CHECK(l.front() == doctest::Approx(0.1));
  CHECK(l.back() == doctest::Approx(0.001));
  for (std::size_t i = 1; i < l.size(); ++i)
    CHECK(l[i - 1] / l[i] == doctest::Approx(std::pow(100.0, 1.0 / 9.0)));
}

TEST_CASE("rate experiment on a known smoothness") {
  const auto p = make_power_law(10000, 2, 2);
  const auto levels = log_spaced_levels(0.001, 0.1, 10);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto r = rate_experiment(p, 0.375, levels, seeds);
  CHECK(r.predicted_exponent == doctest::Approx(3.0 / 7.0));
  CHECK(std::abs(r.observed_exponent - 3.0 / 7.0) <= 0.05);
  CHECK(r.errors.size() == 10);
  for (std::size_t i = 1; i < r.errors.size(); ++i) CHECK(r.errors[i] < r.errors[i - 1]);

  CHECK(mu_to_model(0.2, 1.0).rate_exponent == doctest::Approx(0.2857).epsilon(1e-4));

  const auto wrong = rate_experiment(p, 1.5, levels, seeds);
  CHECK(std::abs(wrong.observed_exponent - wrong.predicted_exponent) > 0.05);
}

TEST_CASE("rate experiment argument checks") {
  const auto p = make_power_law(100, 2, 2);
  CHECK_THROWS_AS(rate_experiment(p, 0.375, {0.1, 0.01}, {1}), ConfigError);
  CHECK_THROWS_AS(rate_experiment(p, 0.375, {0.1, 0.01, 1.5}, {1}), ConfigError);
  CHECK_THROWS_AS(rate_experiment(p, 0.375, {0.1, 0.01, 0.01}, {1}), ConfigError);
  CHECK_THROWS_AS(rate_experiment(p, 0.375, {0.1, 0.01, 0.001}, {}), ConfigError);
  CHECK_THROWS_AS(rate_experiment(p, 0.0, {0.1, 0.01, 0.001}, {1}), ConfigError);
  auto bare = p;
  bare.x_true.reset();
  CHECK_THROWS_AS(rate_experiment(bare, 0.375, {0.1, 0.01, 0.001}, {1}), ConfigError);
}

TEST_CASE("partial sum growth matches direct summation") {
  const auto p = make_power_law(4000, 2, 2);
  const Vector& s = p.op.sigmas();
  for (double mu : {0.1, 0.3, 0.375, 0.45, 0.6})
    CHECK(partial_sum_growth(s, p.y_clean, mu) ==
          doctest::Approx(direct_growth(s, p.y_clean, mu)).epsilon(1e-9));
  CHECK(partial_sum_growth(s, p.y_clean, 0.01) >= 1.0);
}

TEST_CASE("smoothness verification on power laws") {
  const auto p = make_power_law(10000, 2, 2);
  const auto sd = svd(p.op);
  const auto v = verify_smoothness(sd, p.y_clean, {0.3, 0.5});
  CHECK(v.admissible[0]);
  CHECK(!v.admissible[1]);

  // Growth increases with mu, so admissibility is a prefix of the sorted grid.
  const auto g = verify_smoothness(sd, p.y_clean);
  bool seen_bad = false;
  for (std::size_t i = 0; i < g.mu_tested.size(); ++i) {
    if (i > 0) CHECK(g.partial_sum_growth[i] >= g.partial_sum_growth[i - 1]);
    if (!g.admissible[i]) seen_bad = true;
    if (seen_bad) CHECK(!g.admissible[i]);
  }
  REQUIRE(g.mu_max_estimate);
  // Below the true order the series converges.
  CHECK(partial_sum_growth(sd.sigmas, p.y_clean, 0.325) <= 1.5);
  CHECK(*g.mu_max_estimate > 0.325);
}

TEST_CASE("exponential operator admits no smoothness") {
  const auto p = make_exp_operator(600, 2);
  const auto v = verify_smoothness(svd(p.op), p.y_clean);
  for (bool a : v.admissible) CHECK(!a);
  CHECK(!v.mu_max_estimate);
  CHECK(!max_mu_spectral(svd(p.op), p.y_clean));
}

TEST_CASE("spectral smoothness estimate") {
  const auto diag2 = make_power_law(10000, 2, 2);
  const auto a = max_mu_spectral_fit(svd(diag2.op), diag2.y_clean);
  CHECK(a.method == "fit");
  REQUIRE(a.mu);
  CHECK(std::abs(*a.mu - 0.375) <= 0.05);

  const auto diag1 = make_power_law(10000, 1, 2.5);
  const auto b = max_mu_spectral(svd(diag1.op), diag1.y_clean);
  REQUIRE(b);
  CHECK(std::abs(*b - 0.1) <= 0.05);

  const auto d2 = make_deriv2(256);
  const auto c = max_mu_spectral(svd(d2.op), d2.y_clean);
  REQUIRE(c);
  CHECK(*c > 0.1);
  CHECK(*c < 0.25);
}

TEST_CASE("bound curves") {
  IterationTrace tr;
  tr.k = {1, 2};
  tr.residuals = {0.1, 0.2};
  tr.gradient_norms = {0.05, 0.0};
  const auto b = bound_curves(tr, mu_to_model(0.5, 1.0), 4.0);
  CHECK(b.lower[0] == doctest::Approx(0.2));
  CHECK(std::isnan(b.lower[1]));
  REQUIRE(b.upper);
  CHECK((*b.upper)[0] == doctest::Approx(std::pow(4.0, 0.5) * std::pow(0.1, 0.5)));
  CHECK(!bound_curves(tr, mu_to_model(0.5, 1.0), std::nullopt).upper);

  // In one dimension the lower bound is the error itself.
  const auto one = LinearOperator<double>::diagonal(Vector{{0.3}});
  const Vector x{{2.0}};
  LandweberConfig c;
  c.max_iters = 30;
  const auto t1 = landweber(one, apply(one, x), c, &x);
  const auto b1 = bound_curves(t1, mu_to_model(0.5, 1.0), std::nullopt);
  for (std::size_t k = 0; k < t1.size(); ++k)
    CHECK(b1.lower[k] == doctest::Approx((*t1.errors)[k]).epsilon(1e-12));
}

TEST_CASE("sandwich on the power-law benchmarks") {
  for (const auto& p : {make_power_law(10000, 1, 2.5), make_power_law(10000, 2, 2),
                        make_power_law(10000, 3, 1.5)}) {
    LandweberConfig c;
    c.max_iters = 2000;
    const auto tr = landweber(p, p.y_clean, c);
    const auto b = bound_curves(tr, mu_to_model(*p.mu_exact, 1.0), p.source_w->norm());
    for (std::size_t k = 0; k < tr.size(); ++k) {
      CHECK(b.lower[k] <= (*tr.errors)[k]);
      CHECK((*tr.errors)[k] <= (*b.upper)[k] * (1 + 1e-6));
    }
  }
}
