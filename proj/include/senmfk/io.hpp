#pragma once

#include <string>
#include <vector>

#include "senmfk/model_selection.hpp"
#include "senmfk/nmf.hpp"
#include "senmfk/text_pipeline.hpp"
#include "senmfk/types.hpp"

namespace senmfk::io {

/// `%%MatrixMarket matrix coordinate real general`, 1-based, 17 significant digits.
void write_matrix_market(const std::string& path, const SparseXd& m);
SparseXd read_matrix_market_sparse(const std::string& path);

/// `%%MatrixMarket matrix array real general`, column-major values.
void write_matrix_market(const std::string& path, const MatrixXd& m);
MatrixXd read_matrix_market_dense(const std::string& path);

/// One line per term: `term<TAB>doc_freq`.
void write_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::string& path);

/// Tokenised corpus as JSON lines `{"id": ..., "tokens": [...]}`.
void write_corpus(const std::string& path, const Corpus& corpus);
Corpus read_corpus(const std::string& path);

/// CSV with header `iteration,relative_error`.
void write_trace(const std::string& path, const std::vector<TracePoint>& trace);

/// JSON object {per_k: [...], chosen_k, fallback}. consensus_W is stored separately.
void write_selection_report(const std::string& path, const SelectionReport& report);
SelectionReport read_selection_report(const std::string& path);

std::string format_double(double v);
std::string csv_field(const std::string& s);

void write_text(const std::string& path, const std::string& contents);
std::string read_text(const std::string& path);

}  // namespace senmfk::io
