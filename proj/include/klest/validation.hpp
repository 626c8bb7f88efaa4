#ifndef KLEST_VALIDATION_HPP
#define KLEST_VALIDATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "klest/estimator.hpp"
#include "klest/landweber.hpp"
#include "klest/operators.hpp"
#include "klest/problems.hpp"

namespace klest {

struct CgConfig {
  double tol = 1e-10;
  /// 10 n when zero.
  long max_iters = 0;
};

/// Minimizer of ||Ax - y||^2 + alpha ||x||^2. Closed form for diagonal
/// operators, conjugate gradients on (A*A + alpha I) x = A*y otherwise.
Vector tikhonov_solve(const LinearOperator<double>& op, const Vector& y, double alpha,
                      const CgConfig& cg = {});

/// delta^(2 / (2 mu + 1)); zero for delta = 0 (unregularized).
double apriori_alpha(double delta_abs, double mu);

struct RateExperimentResult {
  std::vector<double> noise_levels;  // relative, strictly decreasing
  std::vector<double> delta_abs;
  std::vector<double> errors;        // mean over seeds
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  double mu_hat = 0.0;
  double observed_exponent = 0.0;      // slope against delta_abs
  double observed_exponent_rel = 0.0;  // slope against the relative level
  double predicted_exponent = 0.0;
  std::vector<std::string> notes;
};

/// Levels are relative noise levels in (0, 1).
RateExperimentResult rate_experiment(const ProblemSpec& p, double mu_hat,
                                     std::vector<double> levels,
                                     const std::vector<std::uint64_t>& seeds);

/// n log-spaced values from hi down to lo.
std::vector<double> log_spaced_levels(double lo, double hi, std::size_t n);

inline constexpr double kGrowthThreshold = 1.5;
inline constexpr double kCoefficientFloor = 1e-12;

struct SmoothnessVerdict {
  std::vector<double> mu_tested;
  std::vector<double> partial_sum_growth;
  std::vector<bool> admissible;
  std::optional<double> mu_max_estimate;
};

std::vector<double> default_mu_grid();

/// Ratio S_n / S_{n/2} of partial sums of |<y,u_i>|^2 / sigma_i^(2+4mu),
/// evaluated in log space. Infinite when the sums are not finite.
double partial_sum_growth(const Vector& sigmas, const Vector& coefficients, double mu);

SmoothnessVerdict verify_smoothness(const SpectralDecomposition<double>& sd, const Vector& y,
                                    const std::vector<double>& mu_list = default_mu_grid(),
                                    double threshold = kGrowthThreshold);

struct SpectralFit {
  std::optional<double> mu;
  std::string method;  // "fit", "bisection" or "none"
  double sigma_decay = 0.0;        // b in sigma_i ~ i^-b
  double coefficient_decay = 0.0;  // s in |<y,u_i>| ~ sigma_i^s
  double r2_sigma = 0.0;
  double r2_coefficient = 0.0;
};

SpectralFit max_mu_spectral_fit(const SpectralDecomposition<double>& sd, const Vector& y,
                                double threshold = kGrowthThreshold);

std::optional<double> max_mu_spectral(const SpectralDecomposition<double>& sd, const Vector& y);

struct BoundCurves {
  std::vector<double> lower;
  std::optional<std::vector<double>> upper;
};

/// lower_k = R_k^2 / G_k (NaN where G_k = 0 < R_k) and, given ||w||,
/// upper_k = ||w||^(1/(2mu+1)) R_k^(2mu/(2mu+1)).
BoundCurves bound_curves(const IterationTrace& trace, const SourceConditionModel& model,
                         std::optional<double> w_norm);

}  // namespace klest

#endif  // KLEST_VALIDATION_HPP
