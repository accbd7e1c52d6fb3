#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "senmfk/assignment.hpp"
#include "senmfk/error.hpp"
#include "senmfk/nmf.hpp"
#include "senmfk/types.hpp"

namespace senmfk {

/// Exact matching is used up to this rank; greedy matching above it.
inline constexpr Index kExactMatchingMaxRank = 12;

struct ColumnClustering {
  /// labels[s][c] is the cluster of column c of ensemble member s.
  std::vector<std::vector<int>> labels;
  /// Unit-norm cluster centroids, one column per cluster.
  MatrixXd centroids;
  int rounds = 0;
};

/// Groups the p*k columns of an ensemble into k clusters holding exactly one
/// column from each member. Centroids start from member 0; every member is
/// matched one-to-one onto the centroids by cosine similarity and centroids
/// are re-averaged until the labels stop changing (at most `max_rounds`).
template <typename Scalar>
ColumnClustering cluster_columns(const std::vector<Matrix<Scalar>>& sets, int max_rounds = 100) {
  if (sets.empty()) throw Error(ErrorKind::ShapeMismatch, "cluster_columns: empty ensemble");
  const Index rows = sets.front().rows();
  const Index k = sets.front().cols();
  for (const auto& s : sets) {
    if (s.rows() != rows || s.cols() != k) {
      throw Error(ErrorKind::ShapeMismatch, "cluster_columns: ensemble members differ in shape");
    }
  }

  std::vector<MatrixXd> unit;
  unit.reserve(sets.size());
  for (const auto& s : sets) unit.push_back(normalized_columns<double>(s.template cast<double>()));

  ColumnClustering out;
  out.centroids = unit.front();
  std::vector<std::vector<int>> labels;
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<std::vector<int>> next(sets.size());
    for (std::size_t s = 0; s < unit.size(); ++s) {
      const MatrixXd score = out.centroids.transpose() * unit[s];  // cluster x column
      const auto cluster_to_col =
          k <= kExactMatchingMaxRank ? max_weight_assignment(score) : greedy_assignment(score);
      next[s].assign(static_cast<std::size_t>(k), -1);
      for (Index c = 0; c < k; ++c) next[s][static_cast<std::size_t>(cluster_to_col[c])] = static_cast<int>(c);
    }

    MatrixXd sum = MatrixXd::Zero(rows, k);
    for (std::size_t s = 0; s < unit.size(); ++s) {
      for (Index c = 0; c < k; ++c) sum.col(next[s][static_cast<std::size_t>(c)]) += unit[s].col(c);
    }
    out.centroids = normalized_columns<double>(std::move(sum));
    out.rounds = round + 1;
    const bool stable = next == labels;
    labels = std::move(next);
    if (stable) break;
  }
  out.labels = std::move(labels);
  return out;
}

struct SilhouetteResult {
  std::vector<double> per_cluster_min;
  double overall_min = 0.0;
  double overall_mean = 0.0;
  /// Set when only one cluster exists; the scores are then 1.0 by convention.
  bool single_cluster = false;
};

/// Silhouette of each column under cosine distance 1 - cos(x, y). Singleton
/// clusters score 0, as does a point whose a and b are both 0.
template <typename Derived>
SilhouetteResult silhouette(const Eigen::MatrixBase<Derived>& columns, const std::vector<int>& labels) {
  const Index n = columns.cols();
  if (static_cast<Index>(labels.size()) != n) {
    throw Error(ErrorKind::ShapeMismatch, "silhouette: one label per column required");
  }
  if (n == 0) throw Error(ErrorKind::ShapeMismatch, "silhouette: no columns");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Index> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0) throw Error(ErrorKind::ShapeMismatch, "silhouette: negative label");
    ++size[static_cast<std::size_t>(l)];
  }
  if (std::find(size.begin(), size.end(), 0) != size.end()) {
    throw Error(ErrorKind::ShapeMismatch, "silhouette: empty cluster");
  }

  SilhouetteResult out;
  if (k == 1) {
    out.per_cluster_min = {1.0};
    out.overall_min = 1.0;
    out.overall_mean = 1.0;
    out.single_cluster = true;
    return out;
  }

  const MatrixXd unit = normalized_columns<double>(columns.template cast<double>());
  const MatrixXd dist = (MatrixXd::Ones(n, n) - unit.transpose() * unit).cwiseMax(0.0);

  out.per_cluster_min.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  out.overall_min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::vector<double> mean_to(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    std::fill(mean_to.begin(), mean_to.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j != i) mean_to[static_cast<std::size_t>(labels[j])] += dist(i, j);
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    double s = 0.0;
    if (size[own] > 1) {
      const double a = mean_to[own] / static_cast<double>(size[own] - 1);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < mean_to.size(); ++c) {
        if (c != own) b = std::min(b, mean_to[c] / static_cast<double>(size[c]));
      }
      const double denom = std::max(a, b);
      s = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    out.per_cluster_min[own] = std::min(out.per_cluster_min[own], s);
    out.overall_min = std::min(out.overall_min, s);
    total += s;
  }
  out.overall_mean = total / static_cast<double>(n);
  return out;
}

struct SelectionConfig {
  Index k_min = 1;
  Index k_max = 10;
  int n_perturbations = 10;
  double delta = 0.03;
  double silhouette_threshold = 0.75;
  NmfConfig nmf;
  /// Same perturbation factor on (i, j) and (j, i); keeps symmetric input symmetric.
  bool symmetric_perturbation = false;
  /// When false every ensemble member reuses nmf.seed for initialisation.
  bool distinct_seeds = true;
  int threads = 1;

  void validate() const {
    nmf.validate();
    if (k_min < 1 || k_min > k_max) throw Error(ErrorKind::InvalidRank, "require 1 <= k_min <= k_max");
    if (n_perturbations < 2) throw Error(ErrorKind::InvalidConfig, "n_perturbations must be >= 2");
    if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidConfig, "delta must lie in [0, 1)");
    if (!(silhouette_threshold > 0.0 && silhouette_threshold < 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "silhouette_threshold must lie in (0, 1)");
    }
  }
};

struct RankScore {
  Index k;
  double min_silhouette;
  double mean_silhouette;
  double relative_error;
};

struct SelectionReport {
  std::vector<RankScore> per_k;
  Index chosen_k = 0;
  /// No rank met the threshold; chosen_k maximises min_silhouette instead.
  bool fallback = false;
  MatrixXd consensus_W;
  /// Objective trace of the first ensemble member at chosen_k.
  std::vector<TracePoint> trace;
};

namespace detail {

/// Runs job(i) for i in [0, count) on up to `threads` workers. Each job
/// writes only its own slot, so the result does not depend on scheduling.
template <typename Job>
void parallel_for(int count, int threads, Job&& job) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// solve_h restricted to the non-zero columns of `basis`; the rest get zero rows.
template <typename Scalar>
double consensus_error(const SparseMatrix<Scalar>& x, const MatrixXd& basis, const NmfConfig& config) {
  std::vector<Index> live;
  for (Index c = 0; c < basis.cols(); ++c) {
    if (basis.col(c).squaredNorm() > 0.0) live.push_back(c);
  }
  if (live.empty()) return relative_error(x, Matrix<Scalar>::Zero(x.rows(), 1), Matrix<Scalar>::Zero(1, x.cols()));
  Matrix<Scalar> w(basis.rows(), static_cast<Index>(live.size()));
  for (std::size_t i = 0; i < live.size(); ++i) w.col(static_cast<Index>(i)) = basis.col(live[i]).template cast<Scalar>();
  const Matrix<Scalar> h = solve_h(x, w, config);
  return relative_error(x, w, h);
}

}  // namespace detail

/// Automatic rank selection: for every k in [k_min, k_max] factorise a set of
/// perturbed copies of X, cluster the resulting topic columns and score their
/// stability by silhouette. The chosen rank is the largest k whose minimum
/// silhouette reaches the threshold.
template <typename Scalar>
SelectionReport nmfk(const SparseMatrix<Scalar>& x, const SelectionConfig& config) {
  config.validate();
  const Index limit = std::min(x.rows(), x.cols());
  if (config.k_max > limit) {
    throw Error(ErrorKind::InvalidRank,
                "k_max = " + std::to_string(config.k_max) + " exceeds min(rows, cols) = " + std::to_string(limit));
  }
  detail::require_non_negative(x);
  if (x.nonZeros() == 0) throw Error(ErrorKind::DegenerateMatrix, "nmfk: input matrix is all zero");

  const int p = config.n_perturbations;
  SelectionReport report;
  std::vector<MatrixXd> centroids;
  std::vector<std::vector<TracePoint>> traces;
  for (Index k = config.k_min; k <= config.k_max; ++k) {
    std::vector<Matrix<Scalar>> ensemble(static_cast<std::size_t>(p));
    std::vector<TracePoint> first_trace;
    detail::parallel_for(p, config.threads, [&](int r) {
      const auto ku = static_cast<std::uint64_t>(k);
      const auto ru = static_cast<std::uint64_t>(r);
      const auto xr = perturb(x, config.delta, derive_seed(config.nmf.seed, ku, 2 * ru), config.symmetric_perturbation);
      NmfConfig run = config.nmf;
      run.seed = config.distinct_seeds ? derive_seed(config.nmf.seed, ku, 2 * ru + 1) : config.nmf.seed;
      auto fit = nmf(xr, k, run);
      normalize_columns(fit.W, fit.H);
      if (r == 0) first_trace = std::move(fit.trace);
      ensemble[static_cast<std::size_t>(r)] = std::move(fit.W);
    });

    const auto clusters = cluster_columns(ensemble);
    MatrixXd stacked(x.rows(), k * p);
    std::vector<int> labels(static_cast<std::size_t>(k * p));
    for (int r = 0; r < p; ++r) {
      stacked.middleCols(r * k, k) = ensemble[static_cast<std::size_t>(r)].template cast<double>();
      for (Index c = 0; c < k; ++c) {
        labels[static_cast<std::size_t>(r * k + c)] = clusters.labels[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
    const auto sil = silhouette(stacked, labels);
    const double err = detail::consensus_error(x, clusters.centroids, config.nmf);
    report.per_k.push_back({k, sil.overall_min, sil.overall_mean, err});
    centroids.push_back(clusters.centroids);
    traces.push_back(std::move(first_trace));
  }

  std::size_t pick = report.per_k.size();
  for (std::size_t i = report.per_k.size(); i-- > 0;) {
    if (report.per_k[i].min_silhouette >= config.silhouette_threshold) {
      pick = i;
      break;
    }
  }
  if (pick == report.per_k.size()) {
    report.fallback = true;
    pick = 0;
    for (std::size_t i = 1; i < report.per_k.size(); ++i) {
      if (report.per_k[i].min_silhouette > report.per_k[pick].min_silhouette) pick = i;
    }
  }
  report.chosen_k = report.per_k[pick].k;
  report.consensus_W = std::move(centroids[pick]);
  report.trace = std::move(traces[pick]);
  return report;
}

}  // namespace senmfk
