#ifndef KLEST_LANDWEBER_HPP
#define KLEST_LANDWEBER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "klest/operators.hpp"
#include "klest/problems.hpp"
#include "klest/types.hpp"

namespace klest {

inline constexpr double kDefaultStepScale = 0.25;
inline constexpr double kExactConvergenceFloor = 1e-300;

template <typename Scalar = double>
struct LandweberConfigT {
  /// Explicit step beta. When empty the step is step_scale / ||A||^2.
  std::optional<Scalar> step;
  Scalar step_scale = Scalar(kDefaultStepScale);
  long max_iters = 2000;
  /// Zero vector when empty.
  std::optional<VectorX<Scalar>> x0;
  bool record_iterates = false;
  /// Log every log_stride-th iterate (k = s, 2s, ...). 1 logs all.
  long log_stride = 1;
};

struct NoiseSummary {
  double delta_abs = 0.0;
  double rel_level = 0.0;
  std::uint64_t seed = 0;
};

enum class StopReason { max_iters, exact_residual, exact_gradient };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::exact_residual: return "residual_underflow";
    case StopReason::exact_gradient: return "gradient_underflow";
  }
  return "?";
}

template <typename Scalar = double>
struct IterationTraceT {
  std::vector<long> k;
  std::vector<Scalar> residuals;
  std::vector<Scalar> gradient_norms;
  std::optional<std::vector<Scalar>> errors;
  std::vector<Scalar> lower_bounds;
  Scalar step = Scalar(0);
  Scalar op_norm = Scalar(0);
  long iterations = 0;
  StopReason stop = StopReason::max_iters;
  std::string problem_label;
  std::optional<NoiseSummary> noise;
  std::vector<long> snapshot_k;
  std::vector<VectorX<Scalar>> snapshots;
  VectorX<Scalar> x_final;

  std::size_t size() const noexcept { return residuals.size(); }
};

using LandweberConfig = LandweberConfigT<double>;
using IterationTrace = IterationTraceT<double>;

/// R^2 / G. Zero at an exact solution, NaN when G vanishes with R > 0.
template <typename Scalar>
Scalar lower_bound(Scalar r, Scalar g) {
  if (r == Scalar(0)) return Scalar(0);
  if (g == Scalar(0)) return std::numeric_limits<Scalar>::quiet_NaN();
  return r * r / g;
}

template <typename Scalar>
Scalar resolve_step(const LandweberConfigT<Scalar>& cfg, Scalar norm) {
  const Scalar limit = Scalar(2) / (norm * norm);
  Scalar beta;
  if (cfg.step) {
    beta = *cfg.step;
  } else {
    if (!(cfg.step_scale > Scalar(0) && cfg.step_scale < Scalar(2)))
      throw ConfigError("landweber: step_scale must lie in (0, 2)");
    beta = cfg.step_scale / (norm * norm);
  }
  if (!(beta > Scalar(0) && beta < limit) || !std::isfinite(double(beta)))
    throw ConfigError("landweber: step " + std::to_string(double(beta)) + " outside (0, " +
                      std::to_string(double(limit)) + ")");
  return beta;
}

/// Landweber iteration x_{k+1} = x_k - beta A*(A x_k - y) from x0, logging
/// R_k = ||A x_k - y|| and G_k = ||A*(A x_k - y)|| for k >= 1.
template <typename Scalar>
IterationTraceT<Scalar> landweber(const LinearOperator<Scalar>& op, const VectorX<Scalar>& data,
                                  const LandweberConfigT<Scalar>& cfg,
                                  const VectorX<Scalar>* x_true = nullptr) {
  if (data.size() != op.rows())
    throw DimensionError("landweber: data has length " + std::to_string(data.size()) +
                         ", operator has " + std::to_string(op.rows()) + " rows");
  if (cfg.max_iters < 1) throw ConfigError("landweber: max_iters must be >= 1");
  if (cfg.log_stride < 1) throw ConfigError("landweber: log_stride must be >= 1");
  if (x_true && x_true->size() != op.cols())
    throw DimensionError("landweber: x_true has wrong length");

  IterationTraceT<Scalar> tr;
  tr.op_norm = operator_norm(op);
  tr.step = resolve_step(cfg, tr.op_norm);
  const Scalar beta = tr.step;

  VectorX<Scalar> x = cfg.x0 ? *cfg.x0 : VectorX<Scalar>::Zero(op.cols());
  if (x.size() != op.cols()) throw DimensionError("landweber: x0 has wrong length");
  if (x_true) tr.errors.emplace();

  const long K = cfg.max_iters;
  const long snap_stride = (K + 99) / 100;
  const std::size_t expected = static_cast<std::size_t>(K / cfg.log_stride + 1);
  tr.k.reserve(expected);
  tr.residuals.reserve(expected);
  tr.gradient_norms.reserve(expected);
  tr.lower_bounds.reserve(expected);
  if (tr.errors) tr.errors->reserve(expected);

  VectorX<Scalar> r = apply(op, x) - data;
  VectorX<Scalar> g = apply_adjoint(op, r);
  for (long k = 1; k <= K; ++k) {
    x.noalias() -= beta * g;
    r = apply(op, x) - data;
    g = apply_adjoint(op, r);
    const Scalar rn = r.norm();
    const Scalar gn = g.norm();
    if (!std::isfinite(double(rn)) || !std::isfinite(double(gn)))
      throw NumericalError("landweber: non-finite residual or gradient at iteration " +
                           std::to_string(k));
    const bool exact_r = rn < Scalar(kExactConvergenceFloor);
    const bool exact_g = gn < Scalar(kExactConvergenceFloor);
    if (k % cfg.log_stride == 0 || exact_r || exact_g || k == K) {
      tr.k.push_back(k);
      tr.residuals.push_back(rn);
      tr.gradient_norms.push_back(gn);
      tr.lower_bounds.push_back(lower_bound(rn, gn));
      if (x_true) tr.errors->push_back((x - *x_true).norm());
    }
    if (cfg.record_iterates && (k % snap_stride == 0 || k == K)) {
      tr.snapshot_k.push_back(k);
      tr.snapshots.push_back(x);
    }
    tr.iterations = k;
    if (exact_r || exact_g) {
      tr.stop = exact_r ? StopReason::exact_residual : StopReason::exact_gradient;
      break;
    }
  }
  tr.x_final = std::move(x);
  return tr;
}

inline IterationTrace landweber(const ProblemSpec& p, const Vector& data, const LandweberConfig& cfg,
                                const std::optional<NoisyData>& noise = std::nullopt) {
  auto tr = landweber(p.op, data, cfg, p.x_true ? &*p.x_true : nullptr);
  tr.problem_label = p.label;
  if (noise) tr.noise = NoiseSummary{noise->delta_abs, noise->rel_level, noise->seed};
  return tr;
}

inline IterationTrace landweber(const ProblemSpec& p, const NoisyData& data,
                                const LandweberConfig& cfg) {
  return landweber(p, data.y_delta, cfg, data);
}

}  // namespace klest

#endif  // KLEST_LANDWEBER_HPP
