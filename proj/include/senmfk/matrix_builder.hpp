#pragma once

#include <cstddef>

#include "senmfk/text_pipeline.hpp"
#include "senmfk/types.hpp"

namespace senmfk {

struct SemanticConfig {
  std::size_t window = 100;
  double shift = 4.0;

  void validate() const;
};

/// Term-document TF-IDF matrix (terms x documents). Raw counts times
/// ln((1 + n) / (1 + df)) + 1, each column scaled to unit L2 norm.
/// Throws EmptyColumn for a document without vocabulary terms.
SparseXd build_tfidf(const Corpus& corpus, const Vocabulary& vocab);

/// Symmetric windowed pair counts. Tokens at positions p < q with
/// q - p < window add one to (i, j) and one to (j, i); out-of-vocabulary
/// tokens occupy positions but are not counted.
SparseXd build_cooccurrence(const Corpus& corpus, const Vocabulary& vocab, const SemanticConfig& config);

/// Shifted positive PMI with marginals taken from the count matrix itself.
/// Throws DegenerateMatrix when the counts sum to zero.
SparseXd sppmi(const SparseXd& cooc, double shift);

}  // namespace senmfk
