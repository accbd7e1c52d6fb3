#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "senmfk/manifest.hpp"
#include "senmfk/matrix_builder.hpp"
#include "senmfk/model_selection.hpp"
#include "senmfk/text_pipeline.hpp"
#include "senmfk/types.hpp"

namespace senmfk {

struct SplitConfig {
  PipelineConfig text;
  SemanticConfig semantic;
  SelectionConfig selection_x;
  SelectionConfig selection_m;
  SelectionConfig selection_joint;
  /// Derive the joint scan from the selected ranks: [min(k1, k2), k1 + k2].
  bool auto_joint_range = true;
  std::size_t top_n_words = 20;

  /// Gives each selection stage its own stream derived from `seed`.
  void set_seed(std::uint64_t seed);
  void set_threads(int threads);
};

/// Flat snapshot of every setting, keyed like the CLI flags.
nlohmann::json to_json(const SplitConfig& config);

struct Factorization {
  MatrixXd W;
  MatrixXd H;
  SelectionReport report;
};

/// Rank-selected factorisation of the TF-IDF matrix; H is regressed on the consensus basis.
Factorization factorize_x(const SparseXd& x, const SelectionConfig& selection);

/// Same for the SPPMI matrix, with symmetric perturbations. Throws
/// DegenerateMatrix when M has no positive entry.
Factorization factorize_m(const SparseXd& m, const SelectionConfig& selection);

/// Unit-L2 columns of W1 followed by those of W2.
MatrixXd concat_normalized(const MatrixXd& w1, const MatrixXd& w2);

/// Scan used for the merge step given the two selected ranks. The upper end
/// never exceeds k1 + k2.
SelectionConfig joint_selection(const SelectionConfig& base, Index k1, Index k2, bool auto_range);

/// Rank-selected factorisation of the concatenated topic matrix; H is the
/// mixing matrix over the k1 + k2 input topics.
Factorization joint_factorize(const MatrixXd& wcat, const SelectionConfig& selection);

/// Document coordinates in the merged topic space.
MatrixXd final_regression(const SparseXd& x, const MatrixXd& w, const NmfConfig& config);

struct Assignments {
  std::vector<int> topic;
  std::vector<double> max_weight;
  std::vector<std::size_t> histogram;
  /// Documents whose H column is all zero; they land on topic 0.
  std::vector<Index> zero_columns;
};

/// Column-wise argmax of H, ties to the smaller topic index.
Assignments assign_documents(const MatrixXd& h);

struct TermWeight {
  std::string term;
  double weight;
};

/// Per topic, terms by descending weight (ties in lexicographic order), at
/// most top_n of them.
std::vector<std::vector<TermWeight>> top_words(const MatrixXd& w, const Vocabulary& vocab, std::size_t top_n);

struct TopicModel {
  MatrixXd W;
  MatrixXd H;
  Assignments assignments;
  std::vector<std::vector<TermWeight>> topics;
  Index k1 = 0;
  Index k2 = 0;
  Index k = 0;
  SelectionReport report_x;
  SelectionReport report_m;
  SelectionReport report_joint;
};

/// In-memory factorisation stages on prebuilt matrices.
TopicModel fit_split(const SparseXd& x, const SparseXd& m, const Vocabulary& vocab, const SplitConfig& config);

struct RunOptions {
  std::string workspace;
  /// Skip stages whose fingerprint and output digests match the manifest.
  bool resume = false;
  /// Extra settings recorded in the manifest (input paths and the like).
  nlohmann::json extra_settings = nlohmann::json::object();
};

/// Stage names in execution order.
const std::vector<std::string>& stage_names();

/// Text pipeline stage: writes corpus.jsonl and vocab.txt.
void run_preprocess(const std::string& corpus_path, const SplitConfig& config, const RunOptions& options);

/// Matrix stage: reads corpus.jsonl and vocab.txt, writes X.mtx, cooc.mtx, M.mtx.
void run_matrices(const SplitConfig& config, const RunOptions& options);

/// End-to-end run. Every stage reads its inputs from and writes its outputs
/// to the workspace, so a later run can resume from any completed stage.
TopicModel run_split(const std::string& corpus_path, const SplitConfig& config, const RunOptions& options);

/// Rebuilds the topic model from a finished workspace.
TopicModel load_topic_model(const std::string& workspace);

}  // namespace senmfk
