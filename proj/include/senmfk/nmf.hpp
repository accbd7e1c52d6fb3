#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "senmfk/error.hpp"
#include "senmfk/types.hpp"

namespace senmfk {

struct NmfConfig {
  int max_iter = 1000;
  /// Stop once the relative error changes by less than this (relatively)
  /// across one check stride.
  double tol = 1e-6;
  double epsilon = 1e-12;
  std::uint64_t seed = 0;
  int check_every = 10;

  void validate() const {
    if (max_iter < 1) throw Error(ErrorKind::InvalidConfig, "max_iter must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be > 0");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must be > 0");
    if (check_every < 1) throw Error(ErrorKind::InvalidConfig, "check_every must be >= 1");
  }
};

struct TracePoint {
  int iteration;
  double relative_error;
};

template <typename Scalar>
struct FactorPair {
  Matrix<Scalar> W;
  Matrix<Scalar> H;
  std::vector<TracePoint> trace;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Above this many dense cells the residual falls back to the Gram identity,
// which costs O(nnz k + (m + n) k^2) but loses digits to cancellation.
inline constexpr double kExactResidualCells = 1 << 24;

template <typename Scalar>
void require_non_negative(const SparseMatrix<Scalar>& x) {
  for (Index i = 0; i < x.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(x, i); it; ++it) {
      if (!(it.value() >= Scalar(0))) {
        throw Error(ErrorKind::NonNegativityViolation,
                    "entry (" + std::to_string(i) + ", " + std::to_string(it.col()) + ") is negative or NaN");
      }
    }
  }
}

template <typename Scalar>
double mean_value(const SparseMatrix<Scalar>& x) {
  const double cells = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  if (cells == 0.0) return 0.0;
  double sum = 0.0;
  for (Index i = 0; i < x.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(x, i); it; ++it) sum += it.value();
  }
  return sum / cells;
}

template <typename Scalar>
Matrix<Scalar> random_factor(Index rows, Index cols, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);
  Matrix<Scalar> out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(unit(rng) * scale);
  }
  return out;
}

/// ||X - W H||_F^2 without forming X densely.
template <typename Scalar, typename DerivedW, typename DerivedH>
double residual_squared(const SparseMatrix<Scalar>& x, const Eigen::MatrixBase<DerivedW>& w,
                        const Eigen::MatrixBase<DerivedH>& h) {
  const double cells = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  if (cells <= kExactResidualCells) {
    double total = 0.0;
    Eigen::Matrix<double, 1, Eigen::Dynamic> row(x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
      row.noalias() = (w.row(i) * h).template cast<double>();
      for (typename SparseMatrix<Scalar>::InnerIterator it(x, i); it; ++it) {
        row[it.col()] -= static_cast<double>(it.value());
      }
      total += row.squaredNorm();
    }
    return total;
  }
  const Matrix<double> wd = w.template cast<double>();
  const Matrix<double> hd = h.template cast<double>();
  double cross = 0.0;
  double x2 = 0.0;
  for (Index i = 0; i < x.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(x, i); it; ++it) {
      const double v = static_cast<double>(it.value());
      x2 += v * v;
      cross += v * wd.row(i).dot(hd.col(it.col()));
    }
  }
  const double gram = ((wd.transpose() * wd).cwiseProduct(hd * hd.transpose())).sum();
  return std::max(0.0, x2 - 2.0 * cross + gram);
}

template <typename Scalar>
double frobenius_squared(const SparseMatrix<Scalar>& x) {
  double s = 0.0;
  for (Index i = 0; i < x.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(x, i); it; ++it) {
      s += static_cast<double>(it.value()) * static_cast<double>(it.value());
    }
  }
  return s;
}

inline bool stalled(double previous, double current, double tol) {
  const double denom = std::max(previous, std::numeric_limits<double>::min());
  return (previous - current) / denom < tol;
}

}  // namespace detail

/// ||X - W H||_F / ||X||_F. For X = 0 the absolute residual ||W H||_F is
/// returned instead, so an all-zero fit still reports 0.
template <typename Scalar, typename DerivedW, typename DerivedH>
double relative_error(const SparseMatrix<Scalar>& x, const Eigen::MatrixBase<DerivedW>& w,
                      const Eigen::MatrixBase<DerivedH>& h) {
  if (w.rows() != x.rows() || h.cols() != x.cols() || w.cols() != h.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "relative_error: X, W and H are not conformable");
  }
  const double num = std::sqrt(detail::residual_squared(x, w, h));
  const double den = std::sqrt(detail::frobenius_squared(x));
  return den > 0.0 ? num / den : num;
}

/// 1/2 ||X - W H||^2 + alpha ||M - W G||^2. Diagnostic only; nothing in the
/// pipeline minimises it.
template <typename Scalar>
double joint_objective(const SparseMatrix<Scalar>& x, const SparseMatrix<Scalar>& m, const Matrix<Scalar>& w,
                       const Matrix<Scalar>& h, const Matrix<Scalar>& g, double alpha) {
  if (w.rows() != x.rows() || h.cols() != x.cols() || w.cols() != h.rows() || m.rows() != w.rows() ||
      g.rows() != w.cols() || g.cols() != m.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "joint_objective: operands are not conformable");
  }
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidConfig, "alpha must be >= 0");
  double value = 0.5 * detail::residual_squared(x, w, h);
  if (alpha > 0.0) value += alpha * detail::residual_squared(m, w, g);
  return value;
}

/// One multiplicative step on H: H <- H * (W'X) / (W'W H + eps). `xt` is X transposed.
template <typename Scalar>
void update_h(const SparseMatrix<Scalar>& xt, const Matrix<Scalar>& w, Matrix<Scalar>& h, Scalar eps) {
  const Matrix<Scalar> gram = w.transpose() * w;
  const Matrix<Scalar> numer = (xt * w).transpose();
  h.array() *= numer.array() / ((gram * h).array() + eps);
}

/// One multiplicative step on W: W <- W * (X H') / (W H H' + eps).
template <typename Scalar>
void update_w(const SparseMatrix<Scalar>& x, Matrix<Scalar>& w, const Matrix<Scalar>& h, Scalar eps) {
  const Matrix<Scalar> gram = h * h.transpose();
  const Matrix<Scalar> numer = x * h.transpose();
  w.array() *= numer.array() / ((w * gram).array() + eps);
}

/// Frobenius NMF by Lee-Seung multiplicative updates (H first, then W).
template <typename Scalar>
FactorPair<Scalar> nmf(const SparseMatrix<Scalar>& x, Index k, const NmfConfig& config) {
  config.validate();
  if (k < 1 || k > std::min(x.rows(), x.cols())) {
    throw Error(ErrorKind::InvalidRank, "k = " + std::to_string(k) + " outside [1, " +
                                            std::to_string(std::min(x.rows(), x.cols())) + "]");
  }
  detail::require_non_negative(x);

  const double mean = detail::mean_value(x);
  // Each factor gets sqrt(mean / k) so the product carries the data scale.
  const double scale = mean > 0.0 ? std::sqrt(mean / static_cast<double>(k)) : 1.0;
  FactorPair<Scalar> out;
  out.W = detail::random_factor<Scalar>(x.rows(), k, scale, derive_seed(config.seed, 1));
  out.H = detail::random_factor<Scalar>(k, x.cols(), scale, derive_seed(config.seed, 2));

  const Scalar eps = static_cast<Scalar>(config.epsilon);
  const SparseMatrix<Scalar> xt = x.transpose();

  double previous = relative_error(x, out.W, out.H);
  out.trace.push_back({0, previous});
  int it = 0;
  while (it < config.max_iter) {
    ++it;
    update_h(xt, out.W, out.H, eps);
    update_w(x, out.W, out.H, eps);

    if (it % config.check_every == 0 || it == config.max_iter) {
      const double current = relative_error(x, out.W, out.H);
      out.trace.push_back({it, current});
      if (detail::stalled(previous, current, config.tol)) {
        out.converged = true;
        break;
      }
      previous = current;
    }
  }
  out.iterations = it;
  return out;
}

/// Non-negative regression of X onto a frozen basis W: only the H update runs.
template <typename Scalar>
Matrix<Scalar> solve_h(const SparseMatrix<Scalar>& x, const Matrix<Scalar>& w, const NmfConfig& config) {
  config.validate();
  if (w.rows() != x.rows()) throw Error(ErrorKind::DimensionMismatch, "solve_h: W rows differ from X rows");
  if (w.cols() < 1) throw Error(ErrorKind::DegenerateBasis, "solve_h: W has no columns");
  if ((w.array() < Scalar(0)).any() || !w.allFinite()) {
    throw Error(ErrorKind::NonNegativityViolation, "solve_h: W must be finite and non-negative");
  }
  for (Index c = 0; c < w.cols(); ++c) {
    if (w.col(c).squaredNorm() == Scalar(0)) {
      throw Error(ErrorKind::DegenerateBasis, "solve_h: column " + std::to_string(c) + " of W is zero");
    }
  }
  detail::require_non_negative(x);

  const Index k = w.cols();
  const double x_mean = detail::mean_value(x);
  const double w_mean = static_cast<double>(w.sum()) / static_cast<double>(w.size());
  const double scale = x_mean > 0.0 ? x_mean / (static_cast<double>(k) * w_mean) : 1.0;
  Matrix<Scalar> h = detail::random_factor<Scalar>(k, x.cols(), scale, derive_seed(config.seed, 3));

  const Scalar eps = static_cast<Scalar>(config.epsilon);
  const SparseMatrix<Scalar> xt = x.transpose();
  const Matrix<Scalar> gram = w.transpose() * w;
  const Matrix<Scalar> numer = (xt * w).transpose();

  double previous = relative_error(x, w, h);
  for (int it = 1; it <= config.max_iter; ++it) {
    h.array() *= numer.array() / ((gram * h).array() + eps);
    if (it % config.check_every == 0) {
      const double current = relative_error(x, w, h);
      if (detail::stalled(previous, current, config.tol)) break;
      previous = current;
    }
  }
  return h;
}

/// Multiplies every stored entry by an independent draw from [1 - delta, 1 + delta].
/// Draws are keyed on (seed, row, col); with `symmetric` the key is the
/// unordered pair so (i, j) and (j, i) receive the same factor.
template <typename Scalar>
SparseMatrix<Scalar> perturb(const SparseMatrix<Scalar>& x, double delta, std::uint64_t seed,
                             bool symmetric = false) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidConfig, "delta must lie in [0, 1)");
  SparseMatrix<Scalar> out = x;
  if (delta == 0.0) return out;
  for (Index i = 0; i < out.outerSize(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(out, i); it; ++it) {
      auto a = static_cast<std::uint64_t>(i);
      auto b = static_cast<std::uint64_t>(it.col());
      if (symmetric && a > b) std::swap(a, b);
      const double u = unit_uniform(derive_seed(seed, a, b));
      it.valueRef() = static_cast<Scalar>(static_cast<double>(it.value()) * (1.0 + delta * (2.0 * u - 1.0)));
    }
  }
  return out;
}

/// Rescales W to unit L2 columns and moves the norms into the rows of H,
/// leaving W H unchanged. Zero columns are left alone.
template <typename Scalar>
void normalize_columns(Matrix<Scalar>& w, Matrix<Scalar>& h) {
  for (Index c = 0; c < w.cols(); ++c) {
    const Scalar norm = w.col(c).norm();
    if (norm > Scalar(0)) {
      w.col(c) /= norm;
      h.row(c) *= norm;
    }
  }
}

template <typename Scalar>
Matrix<Scalar> normalized_columns(Matrix<Scalar> w) {
  for (Index c = 0; c < w.cols(); ++c) {
    const Scalar norm = w.col(c).norm();
    if (norm > Scalar(0)) w.col(c) /= norm;
  }
  return w;
}

}  // namespace senmfk
