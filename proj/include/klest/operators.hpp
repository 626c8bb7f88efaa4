#ifndef KLEST_OPERATORS_HPP
#define KLEST_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "klest/types.hpp"

namespace klest {

enum class OperatorKind { diagonal, dense, kernel_quadrature };

inline const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::diagonal: return "diagonal";
    case OperatorKind::dense: return "dense";
    case OperatorKind::kernel_quadrature: return "kernel-quadrature";
  }
  return "unknown";
}

/// Bounded linear map A: R^n -> R^m with its adjoint.
///
/// Three storage forms exist. The diagonal form keeps only the singular
/// values (square, A = diag(sigma)). The dense form keeps an m x n matrix.
/// The kernel-quadrature form discretizes an integral operator on [0,1]^2
/// with the midpoint rule on n equal cells and is materialized to a dense
/// matrix at construction; nodes and weights are retained for provenance.
///
/// Operators are immutable once built.
template <typename Scalar = double>
class LinearOperator {
 public:
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;
  using Kernel = std::function<Scalar(Scalar, Scalar)>;

  static LinearOperator diagonal(Vec sigmas) {
    if (sigmas.size() == 0) throw DimensionError("diagonal operator needs at least one sigma");
    for (Eigen::Index i = 0; i < sigmas.size(); ++i) {
      if (!(sigmas[i] > Scalar(0)) || !std::isfinite(static_cast<double>(sigmas[i])))
        throw ConfigError("diagonal sigmas must be finite and strictly positive (index " +
                          std::to_string(i) + ")");
      if (i > 0 && sigmas[i] > sigmas[i - 1])
        throw ConfigError("diagonal sigmas must be non-increasing (index " + std::to_string(i) +
                          ")");
    }
    LinearOperator op(OperatorKind::diagonal);
    op.sigmas_ = std::move(sigmas);
    return op;
  }

  static LinearOperator dense(Mat matrix) {
    if (matrix.size() == 0) throw DimensionError("dense operator must not be empty");
    if (!matrix.allFinite()) throw ConfigError("dense operator has non-finite entries");
    LinearOperator op(OperatorKind::dense);
    op.matrix_ = std::move(matrix);
    return op;
  }

  /// Midpoint discretization of (Ax)(s) = int_0^1 k(s,t) x(t) dt on n cells.
  static LinearOperator kernel(Eigen::Index n, Kernel k) {
    if (n < 1) throw DimensionError("kernel operator needs n >= 1");
    LinearOperator op(OperatorKind::kernel_quadrature);
    const Scalar h = Scalar(1) / Scalar(n);
    op.nodes_ = Vec::LinSpaced(n, h / 2, Scalar(1) - h / 2);
    op.weights_ = Vec::Constant(n, h);
    op.matrix_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) op.matrix_(i, j) = op.weights_[j] * k(op.nodes_[i], op.nodes_[j]);
    op.kernel_ = std::move(k);
    return op;
  }

  OperatorKind kind() const noexcept { return kind_; }
  bool is_diagonal() const noexcept { return kind_ == OperatorKind::diagonal; }

  Eigen::Index rows() const noexcept { return is_diagonal() ? sigmas_.size() : matrix_.rows(); }
  Eigen::Index cols() const noexcept { return is_diagonal() ? sigmas_.size() : matrix_.cols(); }

  const Vec& sigmas() const {
    if (!is_diagonal()) throw Error("sigmas() requested from a non-diagonal operator");
    return sigmas_;
  }
  const Mat& matrix() const {
    if (is_diagonal()) throw Error("matrix() requested from a diagonal operator");
    return matrix_;
  }
  const Vec& nodes() const noexcept { return nodes_; }
  const Vec& weights() const noexcept { return weights_; }
  const Kernel& kernel_function() const noexcept { return kernel_; }

  Mat to_dense() const {
    if (is_diagonal()) return sigmas_.asDiagonal();
    return matrix_;
  }

 private:
  explicit LinearOperator(OperatorKind kind) : kind_(kind) {}

  OperatorKind kind_;
  Vec sigmas_;
  Mat matrix_;
  Vec nodes_;
  Vec weights_;
  Kernel kernel_;
};

template <typename Scalar>
VectorX<Scalar> apply(const LinearOperator<Scalar>& op, const VectorX<Scalar>& x) {
  if (x.size() != op.cols())
    throw DimensionError("apply: expected vector of length " + std::to_string(op.cols()) +
                         ", got " + std::to_string(x.size()));
  if (op.is_diagonal()) return op.sigmas().cwiseProduct(x);
  return op.matrix() * x;
}

template <typename Scalar>
VectorX<Scalar> apply_adjoint(const LinearOperator<Scalar>& op, const VectorX<Scalar>& y) {
  if (y.size() != op.rows())
    throw DimensionError("apply_adjoint: expected vector of length " + std::to_string(op.rows()) +
                         ", got " + std::to_string(y.size()));
  if (op.is_diagonal()) return op.sigmas().cwiseProduct(y);
  return op.matrix().transpose() * y;
}

inline constexpr std::uint64_t kPowerIterationSeed = 0x9e3779b97f4a7c15ULL;

/// Estimate of ||A|| = sigma_1 by power iteration on A*A.
///
/// The start vector is drawn from a fixed-seed generator so the estimate (and
/// hence any step size derived from it) is reproducible. Stops when two
/// consecutive estimates agree to `tol` relative. Diagonal operators return
/// max sigma exactly. Throws ConvergenceError carrying the best estimate when
/// `max_iters` is exhausted.
template <typename Scalar>
Scalar operator_norm(const LinearOperator<Scalar>& op, Scalar tol = Scalar(1e-10),
                     int max_iters = 10000) {
  if (!(tol > Scalar(0))) throw ConfigError("operator_norm: tol must be positive");
  if (op.is_diagonal()) return op.sigmas().maxCoeff();

  std::mt19937_64 rng(kPowerIterationSeed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorX<Scalar> v(op.cols());
  for (auto& vi : v) vi = Scalar(dist(rng));
  v.normalize();

  Scalar estimate(0);
  for (int it = 0; it < max_iters; ++it) {
    const VectorX<Scalar> av = apply(op, v);
    const Scalar next = av.norm();
    if (next == Scalar(0)) return Scalar(0);
    VectorX<Scalar> w = apply_adjoint(op, av);
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) return next;
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  throw ConvergenceError("operator_norm: power iteration did not converge", double(estimate),
                         double(tol));
}

inline constexpr Eigen::Index kMaxSvdSize = 2048;
inline constexpr double kDefaultSvdFloor = 1e-14;

/// Truncated singular system {sigma_i, u_i, v_i}.
///
/// For diagonal operators the singular vectors are the canonical basis and
/// are not stored; left()/right() materialize them on request and
/// coefficients() short-circuits to a copy of the head of y.
template <typename Scalar = double>
struct SpectralDecomposition {
  VectorX<Scalar> sigmas;
  MatrixX<Scalar> u;
  MatrixX<Scalar> v;
  bool canonical_basis = false;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index rank() const noexcept { return sigmas.size(); }

  MatrixX<Scalar> left() const {
    return canonical_basis ? MatrixX<Scalar>(MatrixX<Scalar>::Identity(rows, rank())) : u;
  }
  MatrixX<Scalar> right() const {
    return canonical_basis ? MatrixX<Scalar>(MatrixX<Scalar>::Identity(cols, rank())) : v;
  }

  /// <y, u_i> for all retained i.
  VectorX<Scalar> coefficients(const VectorX<Scalar>& y) const {
    if (y.size() != rows)
      throw DimensionError("coefficients: expected data of length " + std::to_string(rows));
    if (canonical_basis) return y.head(rank());
    return u.transpose() * y;
  }
};

/// Full singular value decomposition with relative truncation.
///
/// Dense and kernel operators go through Eigen's bidiagonal divide-and-conquer
/// SVD and are limited to min(m,n) <= kMaxSvdSize. Singular values below
/// floor * sigma_1 are dropped. Diagonal operators return their own sigmas
/// untouched: those are exact, so the floor does not apply to them.
template <typename Scalar>
SpectralDecomposition<Scalar> svd(const LinearOperator<Scalar>& op,
                                  Scalar floor = Scalar(kDefaultSvdFloor)) {
  SpectralDecomposition<Scalar> sd;
  sd.rows = op.rows();
  sd.cols = op.cols();
  if (op.is_diagonal()) {
    sd.sigmas = op.sigmas();
    sd.canonical_basis = true;
    return sd;
  }
  const auto& a = op.matrix();
  if (std::min(a.rows(), a.cols()) > kMaxSvdSize)
    throw DimensionError("svd: min(m,n) = " + std::to_string(std::min(a.rows(), a.cols())) +
                         " exceeds the dense limit " + std::to_string(kMaxSvdSize));
  Eigen::BDCSVD<MatrixX<Scalar>> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw NumericalError("svd: decomposition failed to converge");
  const auto& s = dec.singularValues();
  Eigen::Index keep = 0;
  const Scalar cutoff = s.size() > 0 ? floor * s[0] : Scalar(0);
  while (keep < s.size() && s[keep] > Scalar(0) && s[keep] >= cutoff) ++keep;
  sd.sigmas = s.head(keep);
  sd.u = dec.matrixU().leftCols(keep);
  sd.v = dec.matrixV().leftCols(keep);
  return sd;
}

}  // namespace klest

#endif  // KLEST_OPERATORS_HPP
