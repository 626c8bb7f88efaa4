#ifndef KLEST_ESTIMATOR_HPP
#define KLEST_ESTIMATOR_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "klest/landweber.hpp"
#include "klest/types.hpp"

namespace klest {

/// Power-law source condition x = (A*A)^mu w with phi(t) = c t^(mu/(2mu+1)).
struct SourceConditionModel {
  double mu = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  double phi_exponent = 0.0;
  double rate_exponent = 0.0;
};

SourceConditionModel mu_to_model(double mu, double c);

/// gamma = 1 corresponds to infinite smoothness.
class InfiniteSmoothness : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct MuFromGamma {
  double mu = 0.0;
  bool nonpositive = false;
};

/// mu = (2 - gamma) / (2 gamma - 2). Throws InfiniteSmoothness for gamma = 1.
MuFromGamma gamma_to_mu(double gamma);

/// gamma = (2 mu + 2) / (2 mu + 1).
double mu_to_gamma(double mu);

/// Least squares fit of log G = gamma log R + b. c_log is -b, so the
/// constant of the model is c = exp(c_log) = R^gamma / G.
struct RegressionFit {
  double gamma = 0.0;
  double c_log = 0.0;
  double rms = 0.0;
  std::size_t count = 0;
};

/// Running centred sums for the 2x2 normal equations; O(1) per point.
class PrefixRegression {
 public:
  void add(double log_r, double log_g);
  std::size_t count() const noexcept { return n_; }
  /// Throws DegenerateRegression when fewer than two distinct abscissae.
  RegressionFit fit() const;

 private:
  std::size_t n_ = 0;
  double mean_x_ = 0.0;
  double mean_y_ = 0.0;
  double sxx_ = 0.0;
  double sxy_ = 0.0;
  double syy_ = 0.0;
};

/// Fit over the first k logged entries of the trace.
RegressionFit regress_prefix(const IterationTrace& trace, std::size_t k);
RegressionFit regress(const std::vector<double>& residuals, const std::vector<double>& gradients,
                      std::size_t k);

enum class Verdict { stable, unstable_suspect_violation, noise_truncated };
const char* to_string(Verdict v);

struct WindowConfig {
  std::size_t w_min = 50;
  double eps_mu = 0.05;
  double eps_c_rel = 0.25;
};

struct NoiseTakeoverConfig {
  std::size_t persistence = 10;
  double min_rise_log = 0.05;
};

struct SaturationConfig {
  std::size_t window = 25;
  double slope_low = 0.85;
  double slope_high = 1.15;
};

struct EstimatorConfig {
  std::size_t k_min = 5;
  WindowConfig window;
  NoiseTakeoverConfig noise;
  SaturationConfig saturation;
  /// Restrict the window search to iterations before a detected saturation.
  bool truncate_at_saturation = true;
  /// More turning points of mu_k than this (each confirmed by a move larger
  /// than eps_mu) marks the track as oscillating. One dip and recovery during
  /// burn-in is normal.
  std::size_t max_reversals = 2;
};

struct StableWindow {
  std::size_t first = 0;  // positions in the track lists
  std::size_t last = 0;
  long k1 = 0;
  long k2 = 0;
  double mu_hat = 0.0;
  double c_hat = 0.0;
};

struct EstimateTrack {
  std::vector<long> k_values;
  std::vector<std::size_t> trace_index;
  std::vector<double> mu;
  std::vector<double> c;
  std::vector<double> gamma;
  std::vector<double> rms;
  std::vector<std::string> notes;
  std::optional<StableWindow> window;
  std::optional<double> mu_hat;
  std::optional<double> c_hat;
  Verdict verdict = Verdict::unstable_suspect_violation;
  std::optional<long> noise_takeover_k;
  std::optional<long> saturation_k;
  /// k of the turning points of mu_k before noise takeover or saturation.
  std::vector<long> reversals;
  bool oscillating = false;

  std::size_t size() const noexcept { return k_values.size(); }
};

/// Per-prefix regression for every prefix length k_min..K plus diagnostics.
EstimateTrack estimate_track(const IterationTrace& trace, const EstimatorConfig& cfg = {});

/// Longest run of entries with mu in (0, inf), max-min of mu <= eps_mu and
/// max/min of c <= 1 + eps_c_rel. Ties go to the earliest run. Entries with
/// k >= k_limit are not considered.
std::optional<StableWindow> detect_stable_window(const EstimateTrack& track,
                                                 const WindowConfig& cfg = {},
                                                 std::optional<long> k_limit = std::nullopt);

/// Positions of the local extrema of v that are confirmed by a subsequent
/// move of more than h in the opposite direction. The initial trend does not
/// count as a turning point. Non-finite entries are ignored.
std::vector<std::size_t> turning_points(const std::vector<double>& v, double h);

/// First k at which the lower bound R^2/G starts a run of `persistence`
/// strict increases while R strictly decreases, the level reached at the end
/// of that run is never lost again and the bound ends at least min_rise_log
/// (natural log) above its value at k.
std::optional<long> detect_noise_takeover(const IterationTrace& trace,
                                          const NoiseTakeoverConfig& cfg = {});

/// Trailing least-squares slope of log(lower bound) against log R for the
/// window ending at each logged entry (NaN where undefined).
std::vector<double> trailing_bound_slopes(const IterationTrace& trace, std::size_t window);

/// Residuals below this fraction of the first one are treated as round-off.
inline constexpr double kRoundoffResidual = 1e-12;

/// Start k of the first trailing window from which every later window has
/// slope in [slope_low, slope_high]. The qualifying tail must contain at
/// least `window` windows. Entries from the first residual at round-off
/// level onward are ignored.
std::optional<long> detect_discretization_saturation(const IterationTrace& trace,
                                                     const SaturationConfig& cfg = {});

/// Least-squares slope of log y against log x over entries [first, last].
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t first,
                    std::size_t last);

}  // namespace klest

#endif  // KLEST_ESTIMATOR_HPP
