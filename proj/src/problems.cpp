#include "klest/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "klest/matrix_market.hpp"

namespace klest {

namespace {

void require_size(Eigen::Index n, Eigen::Index min, const char* who) {
  if (n < min)
    throw ConfigError(std::string(who) + ": n must be at least " + std::to_string(min) + ", got " +
                      std::to_string(n));
}

void require_positive(double v, const char* name, const char* who) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(who) + ": " + name + " must be positive and finite");
}

Vector index_power(Eigen::Index n, double exponent) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::pow(double(i + 1), -exponent);
  return v;
}

ProblemSpec with_operator(LinearOperator<double> op, Vector x, std::string label) {
  Vector y = apply(op, x);
  return ProblemSpec{std::move(op), std::move(x), std::move(y), std::nullopt, std::nullopt,
                     std::move(label), {}};
}

}  // namespace

ProblemSpec make_power_law(Eigen::Index n, double eta, double beta) {
  require_size(n, 2, "make_power_law");
  require_positive(beta, "beta", "make_power_law");
  if (!(eta > 0.5) || !std::isfinite(eta))
    throw ConfigError("make_power_law: eta must exceed 1/2");

  const double mu = (2.0 * eta - 1.0) / (4.0 * beta);
  Vector sigmas = index_power(n, beta);
  Vector x = index_power(n, eta);
  // w_i = x_i sigma_i^(-2 mu), so that (A*A)^mu w = x componentwise.
  Vector w = x.cwiseProduct(sigmas.array().pow(-2.0 * mu).matrix());

  auto p = with_operator(LinearOperator<double>::diagonal(std::move(sigmas)), std::move(x),
                         "power-law diagonal");
  p.mu_exact = mu;
  p.source_w = std::move(w);
  p.params = {{"generator", "power_law"},
              {"n", std::to_string(n)},
              {"eta", format_double(eta)},
              {"beta", format_double(beta)}};
  return p;
}

ProblemSpec make_exp_solution(Eigen::Index n, double beta) {
  require_size(n, 2, "make_exp_solution");
  require_positive(beta, "beta", "make_exp_solution");
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::exp(-double(i + 1));
  auto p = with_operator(LinearOperator<double>::diagonal(index_power(n, beta)), std::move(x),
                         "exponential solution (supersmooth)");
  p.params = {{"generator", "exp_solution"}, {"n", std::to_string(n)}, {"beta", format_double(beta)}};
  return p;
}

ProblemSpec make_exp_operator(Eigen::Index n, double eta) {
  require_size(n, 2, "make_exp_operator");
  require_positive(eta, "eta", "make_exp_operator");
  if (n > kMaxExpOperatorSize)
    throw ConfigError("make_exp_operator: n = " + std::to_string(n) + " exceeds the cap " +
                      std::to_string(kMaxExpOperatorSize) + " (e^-n leaves normal double range)");
  Vector sigmas(n);
  for (Eigen::Index i = 0; i < n; ++i) sigmas[i] = std::exp(-double(i + 1));
  auto p = with_operator(LinearOperator<double>::diagonal(std::move(sigmas)), index_power(n, eta),
                         "exponential operator (source condition violated)");
  p.params = {{"generator", "exp_operator"}, {"n", std::to_string(n)}, {"eta", format_double(eta)}};
  return p;
}

double deriv2_kernel(double s, double t) { return s <= t ? s * (t - 1.0) : t * (s - 1.0); }

double gravity_kernel(double s, double t, double depth) {
  const double d2 = depth * depth + (s - t) * (s - t);
  return depth / (d2 * std::sqrt(d2));
}

ProblemSpec make_deriv2(Eigen::Index n) {
  require_size(n, 8, "make_deriv2");
  auto op = LinearOperator<double>::kernel(n, deriv2_kernel);
  Vector x = op.nodes();
  auto p = with_operator(std::move(op), std::move(x), "deriv2 analog");
  p.params = {{"generator", "deriv2"}, {"n", std::to_string(n)}, {"quadrature", "midpoint"}};
  return p;
}

ProblemSpec make_gravity(Eigen::Index n, double depth) {
  require_size(n, 8, "make_gravity");
  require_positive(depth, "depth", "make_gravity");
  auto op = LinearOperator<double>::kernel(
      n, [depth](double s, double t) { return gravity_kernel(s, t, depth); });
  const double pi = std::numbers::pi;
  Vector x = op.nodes().unaryExpr(
      [pi](double t) { return std::sin(pi * t) + 0.5 * std::sin(2.0 * pi * t); });
  auto p = with_operator(std::move(op), std::move(x),
                         "gravity analog (severely ill-posed candidate)");
  p.params = {{"generator", "gravity"},
              {"n", std::to_string(n)},
              {"depth", format_double(depth)},
              {"quadrature", "midpoint"}};
  return p;
}

NoisyData add_noise(const ProblemSpec& p, double rel_level, std::uint64_t seed) {
  if (!(rel_level >= 0.0) || !std::isfinite(rel_level))
    throw ConfigError("add_noise: relative noise level must be a finite value >= 0");
  NoisyData out;
  out.rel_level = rel_level;
  out.seed = seed;
  out.y_delta = p.y_clean;
  if (rel_level == 0.0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(p.y_clean.size());
  for (auto& ei : e) ei = normal(rng);
  const double target = rel_level * p.y_clean.norm();
  e *= target / e.norm();
  out.y_delta += e;
  out.delta_abs = target;
  return out;
}

ProblemSpec load_external(const std::filesystem::path& matrix_path,
                          const std::filesystem::path& y_path,
                          const std::optional<std::filesystem::path>& x_true_path) {
  auto op = LinearOperator<double>::dense(read_matrix_market(matrix_path));
  Vector y = read_vector(y_path);
  if (y.size() != op.rows())
    throw DimensionError("load_external: matrix has " + std::to_string(op.rows()) +
                         " rows but data vector has " + std::to_string(y.size()) + " entries");
  std::optional<Vector> x;
  if (x_true_path) {
    x = read_vector(*x_true_path);
    if (x->size() != op.cols())
      throw DimensionError("load_external: matrix has " + std::to_string(op.cols()) +
                           " columns but x_true has " + std::to_string(x->size()) + " entries");
  }
  ProblemSpec p{std::move(op), std::move(x), std::move(y), std::nullopt, std::nullopt,
                "external: " + matrix_path.filename().string(), {}};
  p.params = {{"generator", "external"},
              {"matrix", matrix_path.string()},
              {"data", y_path.string()}};
  if (x_true_path) p.params["x_true"] = x_true_path->string();
  return p;
}

}  // namespace klest
