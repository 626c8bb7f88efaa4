#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "klest/matrix_market.hpp"
#include "klest/problems.hpp"

using namespace klest;

namespace {

// S_n / S_{n/2} of sum_i term(i), summed directly in long double.
long double direct_growth(int n, const std::function<long double(int)>& term) {
  long double half = 0, full = 0;
  for (int i = 1; i <= n; ++i) {
    full += term(i);
    if (i == n / 2) half = full;
  }
  return full / half;
}

}  // namespace

TEST_CASE("power-law smoothness exponents") {
  CHECK(*make_power_law(100, 1, 2.5).mu_exact == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(*make_power_law(100, 2, 2).mu_exact == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(*make_power_law(100, 3, 1.5).mu_exact == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(make_power_law(100, 0.5, 2), ConfigError);
  CHECK_THROWS_AS(make_power_law(100, 2, 0), ConfigError);
}

TEST_CASE("power-law generator is consistent") {
  const auto p = make_power_law(1000, 2, 2);
  const Vector& s = p.op.sigmas();
  CHECK(s[9] == doctest::Approx(0.01));
  CHECK((*p.x_true)[1] == doctest::Approx(0.25));
  CHECK((apply(p.op, *p.x_true) - p.y_clean).norm() == 0.0);
  // (A*A)^mu w reproduces x_true.
  const Vector rebuilt =
      s.array().pow(2.0 * *p.mu_exact).matrix().cwiseProduct(*p.source_w);
  CHECK((rebuilt - *p.x_true).norm() <= 1e-8 * p.x_true->norm());
}

TEST_CASE("exp solution") {
  const auto p = make_exp_solution(4, 1.0);
  CHECK((*p.x_true)[0] == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(!p.mu_exact);
  const Vector expect{{std::exp(-1.0), std::exp(-2.0) / 2, std::exp(-3.0) / 3, std::exp(-4.0) / 4}};
  CHECK((p.y_clean - expect).norm() <= 1e-15);
  // Terms y_i^2 / sigma_i^(2+4 mu) = i^30 e^-2i at beta = 1.5, mu = 5: summable.
  const auto g = direct_growth(2000, [](int i) {
    return std::exp(30.0L * std::log((long double)i) - 2.0L * i);
  });
  CHECK(double(g) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exp operator") {
  const auto p = make_exp_operator(3, 1.0);
  const Vector expect{{std::exp(-1.0), std::exp(-2.0) / 2, std::exp(-3.0) / 3}};
  CHECK((p.y_clean - expect).norm() <= 1e-15);
  const auto q = make_exp_operator(600, 2.0);
  CHECK((*q.x_true)[2] == doctest::Approx(1.0 / 9.0));
  CHECK(q.op.sigmas()[599] > 0.0);
  CHECK_THROWS_AS(make_exp_operator(kMaxExpOperatorSize + 1, 2.0), ConfigError);
  // Terms i^-4 e^(4 mu i) grow without bound for any mu > 0.
  for (long double mu : {0.01L, 0.05L, 0.1L}) {
    const auto g = direct_growth(600, [mu](int i) {
      return std::exp(-4.0L * std::log((long double)i) + 4.0L * mu * i);
    });
    CHECK(double(g) > 1.5);
  }
}

TEST_CASE("deriv2 kernel") {
  CHECK(deriv2_kernel(0.25, 0.75) == doctest::Approx(-0.0625));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  for (int t = 0; t < 50; ++t) {
    const double s = u(rng), r = u(rng);
    CHECK(deriv2_kernel(s, r) == doctest::Approx(deriv2_kernel(r, s)).epsilon(1e-15));
  }
  const auto p = make_deriv2(16);
  CHECK((*p.x_true)[0] == doctest::Approx(1.0 / 32));
  CHECK((*p.x_true)[15] == doctest::Approx(31.0 / 32));
  CHECK((apply(p.op, *p.x_true) - p.y_clean).norm() == 0.0);
  CHECK_THROWS_AS(make_deriv2(7), ConfigError);
}

TEST_CASE("gravity kernel") {
  CHECK(gravity_kernel(0.3, 0.3, 0.25) == doctest::Approx(16.0));
  // 0.25 / (1.0625 * sqrt(1.0625))
  CHECK(gravity_kernel(0.0, 1.0, 0.25) == doctest::Approx(0.228269).epsilon(1e-5));
  const auto p = make_gravity(32);
  const double t0 = 1.0 / 64;
  CHECK((*p.x_true)[0] ==
        doctest::Approx(std::sin(M_PI * t0) + 0.5 * std::sin(2 * M_PI * t0)));
  CHECK_THROWS_AS(make_gravity(32, 0.0), ConfigError);
}

TEST_CASE("noise") {
  const auto p = make_power_law(500, 2, 2);
  const auto zero = add_noise(p, 0.0, 1);
  CHECK(zero.y_delta == p.y_clean);
  CHECK(zero.delta_abs == 0.0);

  const auto a = add_noise(p, 0.01, 7);
  CHECK((a.y_delta - p.y_clean).norm() / p.y_clean.norm() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(a.delta_abs == doctest::Approx(0.01 * p.y_clean.norm()));
  const auto b = add_noise(p, 0.01, 7);
  CHECK(a.y_delta == b.y_delta);
  const auto c = add_noise(p, 0.01, 8);
  CHECK(a.y_delta != c.y_delta);
  CHECK_THROWS_AS(add_noise(p, -0.1, 1), ConfigError);
}

TEST_CASE("external problems") {
  const auto dir = std::filesystem::temp_directory_path() / "klest_ext_test";
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "id.mtx", Matrix::Identity(2, 2));
  write_vector(dir / "y.txt", Vector{{1.0, 2.0}});
  const auto p = load_external(dir / "id.mtx", dir / "y.txt");
  CHECK(p.op.rows() == 2);
  CHECK(p.op.cols() == 2);
  CHECK(!p.x_true);

  write_vector(dir / "y3.txt", Vector{{1.0, 2.0, 3.0}});
  CHECK_THROWS_AS(load_external(dir / "id.mtx", dir / "y3.txt"), DimensionError);
  CHECK_THROWS_AS(load_external(dir / "id.mtx", dir / "y.txt", dir / "y3.txt"), DimensionError);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> d;
  Matrix a(10, 8);
  for (auto& v : a.reshaped()) v = d(rng);
  write_matrix_market(dir / "a.mtx", a);
  write_vector(dir / "ya.txt", Vector::Ones(10));
  write_vector(dir / "xa.txt", Vector::Ones(8));
  const auto q = load_external(dir / "a.mtx", dir / "ya.txt", dir / "xa.txt");
  CHECK((q.op.matrix() - a).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(q.x_true);
  std::filesystem::remove_all(dir);
}
