#include "senmfk/matrix_builder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "senmfk/error.hpp"

namespace senmfk {

void SemanticConfig::validate() const {
  if (window < 1) throw Error(ErrorKind::InvalidConfig, "window must be >= 1");
  if (!(shift >= 1.0)) throw Error(ErrorKind::InvalidConfig, "shift must be >= 1");
}

namespace {

std::vector<long> term_indices(const Document& doc, const Vocabulary& vocab) {
  std::vector<long> idx;
  idx.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) idx.push_back(vocab.index_of(t));
  return idx;
}

}  // namespace

SparseXd build_tfidf(const Corpus& corpus, const Vocabulary& vocab) {
  const auto m = static_cast<Index>(vocab.size());
  const auto n = static_cast<Index>(corpus.size());
  const double docs = static_cast<double>(n);

  std::vector<double> idf(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    idf[i] = std::log((1.0 + docs) / (1.0 + static_cast<double>(vocab.doc_freq(i)))) + 1.0;
  }

  std::vector<Eigen::Triplet<double, int>> triplets;
  std::unordered_map<long, double> counts;
  for (Index j = 0; j < n; ++j) {
    const auto& doc = corpus.documents[static_cast<std::size_t>(j)];
    counts.clear();
    for (long i : term_indices(doc, vocab)) {
      if (i >= 0) counts[i] += 1.0;
    }
    if (counts.empty()) throw Error(ErrorKind::EmptyColumn, "document '" + doc.id + "' has no vocabulary terms");

    std::vector<std::pair<long, double>> column(counts.begin(), counts.end());
    std::sort(column.begin(), column.end());
    double norm2 = 0.0;
    for (auto& [i, v] : column) {
      v *= idf[static_cast<std::size_t>(i)];
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [i, v] : column) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v / norm);
    }
  }

  SparseXd x(m, n);
  x.setFromTriplets(triplets.begin(), triplets.end());
  x.makeCompressed();
  return x;
}

SparseXd build_cooccurrence(const Corpus& corpus, const Vocabulary& vocab, const SemanticConfig& config) {
  config.validate();
  const auto m = static_cast<Index>(vocab.size());

  // Counts are integers held in doubles, so accumulation order cannot change them.
  std::unordered_map<std::uint64_t, double> cells;
  auto bump = [&](long a, long b) {
    cells[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b)] += 1.0;
  };
  for (const auto& doc : corpus.documents) {
    const auto idx = term_indices(doc, vocab);
    const std::size_t len = idx.size();
    for (std::size_t p = 0; p < len; ++p) {
      if (idx[p] < 0) continue;
      const std::size_t end = std::min(len, p + config.window);
      for (std::size_t q = p + 1; q < end; ++q) {
        if (idx[q] < 0) continue;
        bump(idx[p], idx[q]);
        bump(idx[q], idx[p]);
      }
    }
  }

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(cells.size());
  for (const auto& [key, value] : cells) {
    triplets.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffULL), value);
  }
  SparseXd c(m, m);
  c.setFromTriplets(triplets.begin(), triplets.end());
  c.makeCompressed();
  return c;
}

SparseXd sppmi(const SparseXd& cooc, double shift) {
  if (cooc.rows() != cooc.cols()) throw Error(ErrorKind::ShapeMismatch, "co-occurrence matrix must be square");
  if (!(shift >= 1.0)) throw Error(ErrorKind::InvalidConfig, "shift must be >= 1");

  VectorXd row_sum = VectorXd::Zero(cooc.rows());
  double total = 0.0;
  for (Index i = 0; i < cooc.outerSize(); ++i) {
    for (SparseXd::InnerIterator it(cooc, i); it; ++it) {
      if (it.value() < 0.0) throw Error(ErrorKind::NonNegativityViolation, "negative co-occurrence count");
      row_sum[i] += it.value();
    }
    total += row_sum[i];
  }
  if (total <= 0.0) throw Error(ErrorKind::DegenerateMatrix, "co-occurrence counts sum to zero");

  const double log_shift = std::log(shift);
  std::vector<Eigen::Triplet<double, int>> triplets;
  for (Index i = 0; i < cooc.outerSize(); ++i) {
    for (SparseXd::InnerIterator it(cooc, i); it; ++it) {
      if (it.value() <= 0.0) continue;
      // r_i * r_j commutes exactly, which keeps the result bitwise symmetric.
      const double pmi = std::log(it.value() * total / (row_sum[i] * row_sum[it.col()]));
      const double v = pmi - log_shift;
      if (v > 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), v);
    }
  }
  SparseXd out(cooc.rows(), cooc.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace senmfk
