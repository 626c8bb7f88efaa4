#ifndef KLEST_PROBLEMS_HPP
#define KLEST_PROBLEMS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "klest/operators.hpp"
#include "klest/types.hpp"

namespace klest {

/// A linear inverse problem A x = y together with what is known about it.
///
/// `source_w` is the representer w with x_true = (A*A)^mu w for mu =
/// mu_exact; only generators with an analytic smoothness supply it.
struct ProblemSpec {
  LinearOperator<double> op;
  std::optional<Vector> x_true;
  Vector y_clean;
  std::optional<double> mu_exact;
  std::optional<Vector> source_w;
  std::string label;
  std::map<std::string, std::string> params;
};

struct NoisyData {
  Vector y_delta;
  double delta_abs = 0.0;
  double rel_level = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr Eigen::Index kMaxExpOperatorSize = 700;
inline constexpr double kDefaultGravityDepth = 0.25;

/// sigma_i = i^-beta, x_i = i^-eta; smoothness (2 eta - 1) / (4 beta).
ProblemSpec make_power_law(Eigen::Index n, double eta, double beta);

/// sigma_i = i^-beta, x_i = e^-i. Satisfies every source condition.
ProblemSpec make_exp_solution(Eigen::Index n, double beta);

/// sigma_i = e^-i, x_i = i^-eta. Violates every source condition. n is capped
/// at kMaxExpOperatorSize so that e^-n stays a normal double.
ProblemSpec make_exp_operator(Eigen::Index n, double eta);

/// Second-derivative Green's function on [0,1]^2, x(t) = t.
ProblemSpec make_deriv2(Eigen::Index n);

/// Gravity-surveying kernel depth (depth^2 + (s-t)^2)^-3/2,
/// x(t) = sin(pi t) + 0.5 sin(2 pi t).
ProblemSpec make_gravity(Eigen::Index n, double depth = kDefaultGravityDepth);

double deriv2_kernel(double s, double t);
double gravity_kernel(double s, double t, double depth);

/// y_delta = y_clean + e with e a seeded standard Gaussian draw rescaled to
/// ||e|| = rel_level * ||y_clean|| exactly.
NoisyData add_noise(const ProblemSpec& p, double rel_level, std::uint64_t seed);

/// Dense problem from a MatrixMarket file and a plain-text data vector.
ProblemSpec load_external(const std::filesystem::path& matrix_path,
                          const std::filesystem::path& y_path,
                          const std::optional<std::filesystem::path>& x_true_path = std::nullopt);

}  // namespace klest

#endif  // KLEST_PROBLEMS_HPP
