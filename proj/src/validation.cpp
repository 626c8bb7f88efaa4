#include "klest/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/IterativeLinearSolvers>

namespace klest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(sum exp(t_i)) over the first `count` finite terms.
double log_sum_exp(const std::vector<double>& t, std::size_t count) {
  double hi = -kInf;
  for (std::size_t i = 0; i < count; ++i) hi = std::max(hi, t[i]);
  if (hi == -kInf || !std::isfinite(hi)) return hi;
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    if (t[i] > -kInf) s += std::exp(t[i] - hi);
  return hi + std::log(s);
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t count = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.count = x.size();
  if (x.size() < 3) return f;
  PrefixRegression reg;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    reg.add(x[i], y[i]);
    my += y[i];
  }
  my /= double(y.size());
  double syy = 0.0;
  for (double v : y) syy += (v - my) * (v - my);
  try {
    const auto r = reg.fit();
    f.slope = r.gamma;
    f.r2 = syy > 0.0 ? 1.0 - r.rms * r.rms * double(x.size()) / syy : 0.0;
  } catch (const DegenerateRegression&) {
  }
  return f;
}

}  // namespace

Vector tikhonov_solve(const LinearOperator<double>& op, const Vector& y, double alpha,
                      const CgConfig& cg) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("tikhonov_solve: alpha must be positive and finite");
  if (y.size() != op.rows())
    throw DimensionError("tikhonov_solve: data has length " + std::to_string(y.size()) +
                         ", operator has " + std::to_string(op.rows()) + " rows");
  if (op.is_diagonal()) {
    const auto& s = op.sigmas();
    return (s.array() * y.array() / (s.array().square() + alpha)).matrix();
  }
  const Matrix& a = op.matrix();
  Matrix normal = a.transpose() * a;
  normal.diagonal().array() += alpha;
  const Vector rhs = a.transpose() * y;
  if (rhs.norm() == 0.0) return Vector::Zero(op.cols());

  Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> solver;
  solver.setTolerance(cg.tol);
  solver.setMaxIterations(cg.max_iters > 0 ? cg.max_iters : 10 * op.cols());
  solver.compute(normal);
  Vector x = solver.solve(rhs);
  const double achieved = (rhs - normal * x).norm() / rhs.norm();
  if (solver.info() != Eigen::Success && !(achieved <= cg.tol))
    throw ConvergenceError("tikhonov_solve: conjugate gradients stopped at relative residual " +
                               std::to_string(achieved),
                           cg.tol, achieved);
  return x;
}

double apriori_alpha(double delta_abs, double mu) {
  if (!(delta_abs >= 0.0) || !std::isfinite(delta_abs))
    throw ConfigError("apriori_alpha: delta must be finite and >= 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("apriori_alpha: mu must be positive");
  if (delta_abs == 0.0) return 0.0;
  return std::pow(delta_abs, 2.0 / (2.0 * mu + 1.0));
}

std::vector<double> log_spaced_levels(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError("log_spaced_levels: need 0 < lo < hi, n >= 2");
  std::vector<double> out(n);
  const double a = std::log(hi), b = std::log(lo);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
  out.front() = hi;
  out.back() = lo;
  return out;
}

RateExperimentResult rate_experiment(const ProblemSpec& p, double mu_hat, std::vector<double> levels,
                                     const std::vector<std::uint64_t>& seeds) {
  if (!p.x_true) throw ConfigError("rate_experiment: problem has no exact solution");
  if (!(mu_hat > 0.0) || !std::isfinite(mu_hat))
    throw ConfigError("rate_experiment: mu_hat must be positive");
  if (levels.size() < 3) throw ConfigError("rate_experiment: at least 3 noise levels required");
  if (seeds.empty()) throw ConfigError("rate_experiment: at least one seed required");
  for (double l : levels)
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("rate_experiment: noise levels must lie in (0, 1)");
  std::sort(levels.begin(), levels.end(), std::greater<>());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw ConfigError("rate_experiment: noise levels must be distinct");

  RateExperimentResult res;
  res.mu_hat = mu_hat;
  res.seeds = seeds;
  res.predicted_exponent = 2.0 * mu_hat / (2.0 * mu_hat + 1.0);
  for (double level : levels) {
    double sum = 0.0;
    double delta = 0.0, alpha = 0.0;
    try {
      for (auto seed : seeds) {
        const auto noisy = add_noise(p, level, seed);
        delta = noisy.delta_abs;
        alpha = apriori_alpha(delta, mu_hat);
        const Vector x = tikhonov_solve(p.op, noisy.y_delta, alpha);
        sum += (x - *p.x_true).norm();
      }
    } catch (const Error& e) {
      res.notes.push_back("level " + std::to_string(level) + " excluded: " + e.what());
      continue;
    }
    res.noise_levels.push_back(level);
    res.delta_abs.push_back(delta);
    res.alphas.push_back(alpha);
    res.errors.push_back(sum / double(seeds.size()));
  }
  if (res.noise_levels.size() < 2)
    throw NumericalError("rate_experiment: fewer than two noise levels succeeded");
  const std::size_t last = res.errors.size() - 1;
  res.observed_exponent = loglog_slope(res.delta_abs, res.errors, 0, last);
  res.observed_exponent_rel = loglog_slope(res.noise_levels, res.errors, 0, last);
  return res;
}

std::vector<double> default_mu_grid() {
  return {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0};
}

double partial_sum_growth(const Vector& sigmas, const Vector& coefficients, double mu) {
  const std::size_t n = static_cast<std::size_t>(std::min(sigmas.size(), coefficients.size()));
  if (n < 2) throw DimensionError("partial_sum_growth: need at least two spectral components");
  std::vector<double> t(n, -kInf);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::abs(coefficients[Eigen::Index(i)]);
    const double s = sigmas[Eigen::Index(i)];
    if (c == 0.0) continue;
    if (!(s > 0.0)) return kInf;
    t[i] = 2.0 * std::log(c) - (2.0 + 4.0 * mu) * std::log(s);
  }
  const double full = log_sum_exp(t, n);
  const double half = log_sum_exp(t, n / 2);
  if (full == -kInf) return 1.0;
  if (half == -kInf || !std::isfinite(full)) return kInf;
  const double ratio = std::exp(full - half);
  return std::isfinite(ratio) ? std::max(ratio, 1.0) : kInf;
}

SmoothnessVerdict verify_smoothness(const SpectralDecomposition<double>& sd, const Vector& y,
                                    const std::vector<double>& mu_list, double threshold) {
  if (y.size() != sd.rows) throw DimensionError("verify_smoothness: data length mismatch");
  const Vector coef = sd.coefficients(y);
  SmoothnessVerdict v;
  for (double mu : mu_list) {
    if (!(mu > 0.0)) throw ConfigError("verify_smoothness: tested mu must be positive");
    const double g = partial_sum_growth(sd.sigmas, coef, mu);
    v.mu_tested.push_back(mu);
    v.partial_sum_growth.push_back(g);
    v.admissible.push_back(g <= threshold);
  }

  // Largest admissible tested mu, refined by bisection up to the next
  // inadmissible tested value.
  std::vector<std::size_t> order(mu_list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return mu_list[a] < mu_list[b]; });
  std::optional<double> lo, hi;
  for (auto i : order) {
    if (v.admissible[i]) {
      lo = mu_list[i];
    } else {
      hi = mu_list[i];
      break;
    }
  }
  if (lo && hi) {
    double a = *lo, b = *hi;
    for (int it = 0; it < 50 && b - a > 1e-6; ++it) {
      const double m = 0.5 * (a + b);
      (partial_sum_growth(sd.sigmas, coef, m) <= threshold ? a : b) = m;
    }
    lo = a;
  }
  v.mu_max_estimate = lo;
  return v;
}

SpectralFit max_mu_spectral_fit(const SpectralDecomposition<double>& sd, const Vector& y,
                                double threshold) {
  if (y.size() != sd.rows) throw DimensionError("max_mu_spectral: data length mismatch");
  const Vector coef = sd.coefficients(y);
  const Eigen::Index n = sd.rank();
  SpectralFit out;

  std::vector<double> li, ls;
  for (Eigen::Index i = 0; i < n; ++i) {
    li.push_back(std::log(double(i + 1)));
    ls.push_back(std::log(sd.sigmas[i]));
  }
  const auto sig = fit_line(li, ls);
  out.sigma_decay = -sig.slope;
  out.r2_sigma = sig.r2;

  const double cmax = n > 0 ? coef.head(n).cwiseAbs().maxCoeff() : 0.0;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = std::abs(coef[i]);
    if (c > 0.0 && c >= kCoefficientFloor * cmax) {
      xs.push_back(std::log(sd.sigmas[i]));
      ys.push_back(std::log(c));
    }
  }
  const auto cf = fit_line(xs, ys);
  out.coefficient_decay = cf.slope;
  out.r2_coefficient = cf.r2;

  if (sig.r2 >= 0.99 && cf.r2 >= 0.99 && out.sigma_decay > 0.0) {
    out.method = "fit";
    const double mu = (out.coefficient_decay - 1.0) / 2.0 - 1.0 / (4.0 * out.sigma_decay);
    if (mu > 0.0) out.mu = mu;
    return out;
  }
  out.method = "bisection";
  out.mu = verify_smoothness(sd, y, default_mu_grid(), threshold).mu_max_estimate;
  if (!out.mu) out.method = "none";
  return out;
}

std::optional<double> max_mu_spectral(const SpectralDecomposition<double>& sd, const Vector& y) {
  return max_mu_spectral_fit(sd, y).mu;
}

BoundCurves bound_curves(const IterationTrace& trace, const SourceConditionModel& model,
                         std::optional<double> w_norm) {
  BoundCurves b;
  b.lower.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i)
    b.lower.push_back(lower_bound(trace.residuals[i], trace.gradient_norms[i]));
  if (w_norm) {
    if (!(*w_norm >= 0.0)) throw ConfigError("bound_curves: ||w|| must be >= 0");
    const double d = 2.0 * model.mu + 1.0;
    const double factor = std::pow(*w_norm, 1.0 / d);
    std::vector<double> up;
    up.reserve(trace.size());
    for (double r : trace.residuals) up.push_back(factor * std::pow(r, 2.0 * model.mu / d));
    b.upper = std::move(up);
  }
  return b;
}

}  // namespace klest
