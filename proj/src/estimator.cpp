#include "klest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace klest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Sliding-window extremum over indices pushed in increasing order.
class MonotoneQueue {
 public:
  MonotoneQueue(const std::vector<double>& values, bool is_max) : v_(values), max_(is_max) {}
  void push(std::size_t i) {
    while (!q_.empty() && (max_ ? v_[q_.back()] <= v_[i] : v_[q_.back()] >= v_[i])) q_.pop_back();
    q_.push_back(i);
  }
  void drop_before(std::size_t first) {
    while (!q_.empty() && q_.front() < first) q_.pop_front();
  }
  void clear() { q_.clear(); }
  double top() const { return v_[q_.front()]; }

 private:
  const std::vector<double>& v_;
  bool max_;
  std::deque<std::size_t> q_;
};

}  // namespace

SourceConditionModel mu_to_model(double mu, double c) {
  if (!positive_finite(mu)) throw ConfigError("mu_to_model: mu must be positive and finite");
  if (!positive_finite(c)) throw ConfigError("mu_to_model: c must be positive and finite");
  SourceConditionModel m;
  m.mu = mu;
  m.c = c;
  const double d = 2.0 * mu + 1.0;
  m.gamma = (2.0 * mu + 2.0) / d;
  m.kappa = -(mu + 1.0) / d;
  m.phi_exponent = mu / d;
  m.rate_exponent = 2.0 * mu / d;
  return m;
}

MuFromGamma gamma_to_mu(double gamma) {
  if (!std::isfinite(gamma)) throw NumericalError("gamma_to_mu: gamma is not finite");
  if (gamma == 1.0) throw InfiniteSmoothness("gamma_to_mu: gamma = 1 means infinite smoothness");
  const double mu = (2.0 - gamma) / (2.0 * gamma - 2.0);
  return {mu, !(mu > 0.0)};
}

double mu_to_gamma(double mu) { return (2.0 * mu + 2.0) / (2.0 * mu + 1.0); }

void PrefixRegression::add(double log_r, double log_g) {
  ++n_;
  const double dx = log_r - mean_x_;
  const double dy = log_g - mean_y_;
  mean_x_ += dx / double(n_);
  mean_y_ += dy / double(n_);
  sxx_ += dx * (log_r - mean_x_);
  sxy_ += dx * (log_g - mean_y_);
  syy_ += dy * (log_g - mean_y_);
}

RegressionFit PrefixRegression::fit() const {
  if (n_ < 2) throw DegenerateRegression("regression needs at least two points");
  const double scale = std::max(1.0, std::abs(mean_x_));
  const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  if (!(sxx_ > double(n_) * tiny * tiny))
    throw DegenerateRegression("regression is degenerate: all residual norms are equal");
  RegressionFit f;
  f.count = n_;
  f.gamma = sxy_ / sxx_;
  const double b = mean_y_ - f.gamma * mean_x_;
  f.c_log = -b;
  f.rms = std::sqrt(std::max(0.0, syy_ - f.gamma * sxy_) / double(n_));
  return f;
}

RegressionFit regress(const std::vector<double>& residuals, const std::vector<double>& gradients,
                      std::size_t k) {
  if (k < 2) throw ConfigError("regress_prefix: k must be at least 2");
  if (k > residuals.size() || k > gradients.size())
    throw DimensionError("regress_prefix: k exceeds trace length");
  PrefixRegression reg;
  for (std::size_t i = 0; i < k; ++i) {
    if (!positive_finite(residuals[i]) || !positive_finite(gradients[i]))
      throw NumericalError("regress_prefix: non-positive residual or gradient at entry " +
                           std::to_string(i + 1));
    reg.add(std::log(residuals[i]), std::log(gradients[i]));
  }
  return reg.fit();
}

RegressionFit regress_prefix(const IterationTrace& trace, std::size_t k) {
  return regress(trace.residuals, trace.gradient_norms, k);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable_suspect_violation: return "unstable-suspect-violation";
    case Verdict::noise_truncated: return "noise-truncated";
  }
  return "?";
}

std::optional<StableWindow> detect_stable_window(const EstimateTrack& track, const WindowConfig& cfg,
                                                 std::optional<long> k_limit) {
  const std::size_t n = track.size();
  if (cfg.w_min < 1) throw ConfigError("detect_stable_window: w_min must be >= 1");
  if (!(cfg.eps_mu >= 0.0) || !(cfg.eps_c_rel >= 0.0))
    throw ConfigError("detect_stable_window: tolerances must be >= 0");

  MonotoneQueue mu_max(track.mu, true), mu_min(track.mu, false);
  MonotoneQueue c_max(track.c, true), c_min(track.c, false);
  auto usable = [&](std::size_t i) {
    if (k_limit && track.k_values[i] >= *k_limit) return false;
    return positive_finite(track.mu[i]) && positive_finite(track.c[i]);
  };

  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t left = 0;
  bool open = false;
  for (std::size_t r = 0; r < n; ++r) {
    if (!usable(r)) {
      open = false;
      continue;
    }
    if (!open) {
      mu_max.clear();
      mu_min.clear();
      c_max.clear();
      c_min.clear();
      left = r;
      open = true;
    }
    mu_max.push(r);
    mu_min.push(r);
    c_max.push(r);
    c_min.push(r);
    while (mu_max.top() - mu_min.top() > cfg.eps_mu ||
           c_max.top() > (1.0 + cfg.eps_c_rel) * c_min.top()) {
      ++left;
      mu_max.drop_before(left);
      mu_min.drop_before(left);
      c_max.drop_before(left);
      c_min.drop_before(left);
    }
    // [left, r] is the longest admissible run ending at r and has the
    // smallest k1, so no shorter run ending at r can do better.
    const std::size_t len = r - left + 1;
    if (len < cfg.w_min) continue;
    if (!best || len > best->second - best->first + 1) best = {left, r};
  }
  if (!best) return std::nullopt;

  StableWindow w;
  w.first = best->first;
  w.last = best->second;
  w.k1 = track.k_values[w.first];
  w.k2 = track.k_values[w.last];
  auto slice = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(w.first),
                               v.begin() + static_cast<std::ptrdiff_t>(w.last) + 1);
  };
  w.mu_hat = median(slice(track.mu));
  w.c_hat = median(slice(track.c));
  return w;
}

std::vector<std::size_t> turning_points(const std::vector<double>& v, double h) {
  std::vector<std::size_t> out;
  std::size_t s = 0;
  while (s < v.size() && !std::isfinite(v[s])) ++s;
  if (s == v.size()) return out;
  std::size_t hi = s, lo = s;
  int dir = 0;
  for (std::size_t i = s + 1; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) continue;
    if (v[i] > v[hi]) hi = i;
    if (v[i] < v[lo]) lo = i;
    if (dir >= 0 && v[hi] - v[i] > h) {
      if (dir == 1) out.push_back(hi);
      dir = -1;
      lo = i;
    } else if (dir <= 0 && v[i] - v[lo] > h) {
      if (dir == -1) out.push_back(lo);
      dir = 1;
      hi = i;
    }
  }
  return out;
}

std::optional<long> detect_noise_takeover(const IterationTrace& trace,
                                          const NoiseTakeoverConfig& cfg) {
  const auto& lb = trace.lower_bounds;
  const auto& r = trace.residuals;
  const std::size_t n = lb.size();
  const std::size_t p = cfg.persistence;
  if (p < 1) throw ConfigError("detect_noise_takeover: persistence must be >= 1");
  if (n < p + 1) return std::nullopt;

  std::vector<double> suffix_min(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = n; i-- > 0;)
    suffix_min[i] = std::isfinite(lb[i]) ? std::min(lb[i], suffix_min[i + 1]) : suffix_min[i + 1];
  const double last = lb[n - 1];
  if (!positive_finite(last)) return std::nullopt;

  for (std::size_t s = 0; s + p < n; ++s) {
    std::size_t j = s;
    while (j < s + p && positive_finite(lb[j]) && lb[j + 1] > lb[j] && r[j + 1] < r[j]) ++j;
    if (j < s + p) {
      s = j;  // no run can start before the first failure
      continue;
    }
    if (suffix_min[s + p] < lb[s + p]) continue;
    if (std::log(last / lb[s]) < cfg.min_rise_log) continue;
    return trace.k[s];
  }
  return std::nullopt;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t first,
                    std::size_t last) {
  PrefixRegression reg;
  for (std::size_t i = first; i <= last && i < x.size() && i < y.size(); ++i)
    if (positive_finite(x[i]) && positive_finite(y[i])) reg.add(std::log(x[i]), std::log(y[i]));
  try {
    return reg.fit().gamma;
  } catch (const DegenerateRegression&) {
    return kNaN;
  }
}

std::vector<double> trailing_bound_slopes(const IterationTrace& trace, std::size_t window) {
  const std::size_t n = trace.size();
  std::vector<double> slopes(n, kNaN);
  if (window < 2) throw ConfigError("trailing_bound_slopes: window must be >= 2");
  for (std::size_t j = window - 1; j < n; ++j)
    slopes[j] = loglog_slope(trace.residuals, trace.lower_bounds, j + 1 - window, j);
  return slopes;
}

std::optional<long> detect_discretization_saturation(const IterationTrace& trace,
                                                     const SaturationConfig& cfg) {
  const std::size_t w = cfg.window;
  // Entries whose residual has fallen to round-off carry no slope information.
  std::size_t n = 0;
  const double floor = trace.size() > 0 ? kRoundoffResidual * trace.residuals.front() : 0.0;
  while (n < trace.size() && trace.residuals[n] > floor) ++n;
  if (n < 2 * w) return std::nullopt;
  const auto slopes = trailing_bound_slopes(trace, w);
  auto in_band = [&](double s) { return s >= cfg.slope_low && s <= cfg.slope_high; };
  std::size_t tail = n;  // first window end of the in-band tail
  while (tail > w - 1 && in_band(slopes[tail - 1])) --tail;
  if (n - tail < w) return std::nullopt;
  return trace.k[tail + 1 - w];
}

EstimateTrack estimate_track(const IterationTrace& trace, const EstimatorConfig& cfg) {
  if (cfg.k_min < 2) throw ConfigError("estimate_track: k_min must be >= 2");
  if (trace.size() < cfg.k_min)
    throw ConfigError("estimate_track: trace has " + std::to_string(trace.size()) +
                      " entries, fewer than k_min = " + std::to_string(cfg.k_min));
  EstimateTrack t;
  PrefixRegression reg;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double r = trace.residuals[i];
    const double g = trace.gradient_norms[i];
    if (!positive_finite(r) || !positive_finite(g)) {
      t.notes.push_back("k=" + std::to_string(trace.k[i]) +
                        ": skipped, residual or gradient is zero (exact convergence)");
      continue;
    }
    reg.add(std::log(r), std::log(g));
    if (i + 1 < cfg.k_min) continue;
    RegressionFit fit;
    try {
      fit = reg.fit();
    } catch (const DegenerateRegression& e) {
      t.notes.push_back("k=" + std::to_string(trace.k[i]) + ": skipped, " + e.what());
      continue;
    }
    double mu;
    try {
      mu = gamma_to_mu(fit.gamma).mu;
    } catch (const InfiniteSmoothness&) {
      mu = std::numeric_limits<double>::infinity();
    }
    t.k_values.push_back(trace.k[i]);
    t.trace_index.push_back(i);
    t.gamma.push_back(fit.gamma);
    t.mu.push_back(mu);
    t.c.push_back(std::exp(fit.c_log));
    t.rms.push_back(fit.rms);
  }

  t.saturation_k = detect_discretization_saturation(trace, cfg.saturation);
  t.noise_takeover_k = detect_noise_takeover(trace, cfg.noise);
  std::optional<long> limit;
  if (cfg.truncate_at_saturation) limit = t.saturation_k;
  t.window = detect_stable_window(t, cfg.window, limit);

  std::optional<long> horizon = t.noise_takeover_k;
  if (t.saturation_k && (!horizon || *t.saturation_k < *horizon)) horizon = t.saturation_k;
  std::vector<double> mu_early;
  for (std::size_t i = 0; i < t.size() && (!horizon || t.k_values[i] < *horizon); ++i)
    mu_early.push_back(t.mu[i]);
  for (auto i : turning_points(mu_early, cfg.window.eps_mu)) t.reversals.push_back(t.k_values[i]);
  t.oscillating = t.reversals.size() > cfg.max_reversals;

  if (t.window && !t.oscillating) {
    t.mu_hat = t.window->mu_hat;
    t.c_hat = t.window->c_hat;
    t.verdict = Verdict::stable;
  } else if (t.oscillating) {
    t.notes.push_back("mu_k oscillates (" + std::to_string(t.reversals.size()) +
                      " turning points); window not used");
    t.verdict = Verdict::unstable_suspect_violation;
  } else {
    t.verdict = t.noise_takeover_k ? Verdict::noise_truncated : Verdict::unstable_suspect_violation;
  }
  return t;
}

}  // namespace klest
