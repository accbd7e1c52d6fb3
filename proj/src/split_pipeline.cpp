#include "senmfk/split_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "senmfk/error.hpp"
#include "senmfk/io.hpp"

namespace senmfk {

namespace fs = std::filesystem;

void SplitConfig::set_seed(std::uint64_t seed) {
  selection_x.nmf.seed = derive_seed(seed, 1);
  selection_m.nmf.seed = derive_seed(seed, 2);
  selection_joint.nmf.seed = derive_seed(seed, 3);
}

void SplitConfig::set_threads(int threads) {
  selection_x.threads = threads;
  selection_m.threads = threads;
  selection_joint.threads = threads;
}

namespace {

nlohmann::json selection_json(const SelectionConfig& s) {
  return {{"k_min", s.k_min},
          {"k_max", s.k_max},
          {"n_perturbations", s.n_perturbations},
          {"delta", s.delta},
          {"silhouette_threshold", s.silhouette_threshold},
          {"max_iter", s.nmf.max_iter},
          {"tol", s.nmf.tol},
          {"epsilon", s.nmf.epsilon},
          {"check_every", s.nmf.check_every},
          {"seed", s.nmf.seed},
          {"symmetric_perturbation", s.symmetric_perturbation},
          {"distinct_seeds", s.distinct_seeds}};
}

std::string stopword_digest(const StopwordSet& words) {
  std::vector<std::string> sorted(words.begin(), words.end());
  std::sort(sorted.begin(), sorted.end());
  std::string joined;
  for (const auto& w : sorted) joined += w + "\n";
  return sha256_hex(joined);
}

SelectionConfig clamp_scan(SelectionConfig s, Index limit) {
  s.k_max = std::min(s.k_max, limit);
  s.k_min = std::min(s.k_min, s.k_max);
  return s;
}

Factorization factorize_with_regression(const SparseXd& x, const SelectionConfig& selection) {
  Factorization f;
  f.report = nmfk(x, selection);
  f.W = f.report.consensus_W;
  f.H = solve_h(x, f.W, selection.nmf);
  return f;
}

SparseXd to_sparse(const MatrixXd& dense) {
  std::vector<Eigen::Triplet<double, int>> triplets;
  for (Index j = 0; j < dense.cols(); ++j) {
    for (Index i = 0; i < dense.rows(); ++i) {
      if (dense(i, j) != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), dense(i, j));
    }
  }
  SparseXd out(dense.rows(), dense.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace

nlohmann::json to_json(const SplitConfig& config) {
  return {{"min_doc_tokens", config.text.min_doc_tokens},
          {"min_df", config.text.min_df},
          {"max_df_ratio", config.text.max_df_ratio},
          {"stopwords_digest", stopword_digest(config.text.stopwords)},
          {"window", config.semantic.window},
          {"shift", config.semantic.shift},
          {"selection_x", selection_json(config.selection_x)},
          {"selection_m", selection_json(config.selection_m)},
          {"selection_joint", selection_json(config.selection_joint)},
          {"auto_joint_range", config.auto_joint_range},
          {"top_n_words", config.top_n_words}};
}

Factorization factorize_x(const SparseXd& x, const SelectionConfig& selection) {
  return factorize_with_regression(x, selection);
}

Factorization factorize_m(const SparseXd& m, const SelectionConfig& selection) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::ShapeMismatch, "word-context matrix must be square");
  if (m.nonZeros() == 0) {
    throw Error(ErrorKind::DegenerateMatrix, "word-context matrix is all zero (shift too large for this corpus?)");
  }
  SelectionConfig s = selection;
  s.symmetric_perturbation = true;
  return factorize_with_regression(m, s);
}

MatrixXd concat_normalized(const MatrixXd& w1, const MatrixXd& w2) {
  if (w1.rows() != w2.rows()) throw Error(ErrorKind::ShapeMismatch, "topic matrices differ in row count");
  MatrixXd out(w1.rows(), w1.cols() + w2.cols());
  out << normalized_columns<double>(w1), normalized_columns<double>(w2);
  return out;
}

SelectionConfig joint_selection(const SelectionConfig& base, Index k1, Index k2, bool auto_range) {
  SelectionConfig s = base;
  const Index total = k1 + k2;
  if (auto_range) {
    s.k_min = std::max<Index>(1, std::min(k1, k2));
    s.k_max = total;
  } else {
    s.k_max = std::min(s.k_max, total);
    s.k_min = std::min(s.k_min, s.k_max);
  }
  return s;
}

Factorization joint_factorize(const MatrixXd& wcat, const SelectionConfig& selection) {
  if ((wcat.array() < 0.0).any() || !wcat.allFinite()) {
    throw Error(ErrorKind::NonNegativityViolation, "concatenated topic matrix must be finite and non-negative");
  }
  const SelectionConfig s = clamp_scan(selection, std::min(wcat.rows(), wcat.cols()));
  return factorize_with_regression(to_sparse(wcat), s);
}

MatrixXd final_regression(const SparseXd& x, const MatrixXd& w, const NmfConfig& config) {
  return solve_h(x, w, config);
}

Assignments assign_documents(const MatrixXd& h) {
  Assignments out;
  out.histogram.assign(static_cast<std::size_t>(h.rows()), 0);
  out.topic.reserve(static_cast<std::size_t>(h.cols()));
  out.max_weight.reserve(static_cast<std::size_t>(h.cols()));
  for (Index j = 0; j < h.cols(); ++j) {
    Index best = 0;
    for (Index t = 1; t < h.rows(); ++t) {
      if (h(t, j) > h(best, j)) best = t;
    }
    const double weight = h.rows() > 0 ? h(best, j) : 0.0;
    if (weight == 0.0) out.zero_columns.push_back(j);
    out.topic.push_back(static_cast<int>(best));
    out.max_weight.push_back(weight);
    if (h.rows() > 0) ++out.histogram[static_cast<std::size_t>(best)];
  }
  return out;
}

std::vector<std::vector<TermWeight>> top_words(const MatrixXd& w, const Vocabulary& vocab, std::size_t top_n) {
  if (static_cast<std::size_t>(w.rows()) != vocab.size()) {
    throw Error(ErrorKind::ShapeMismatch, "topic matrix rows differ from vocabulary size");
  }
  std::vector<std::vector<TermWeight>> topics;
  std::vector<Index> order(static_cast<std::size_t>(w.rows()));
  const std::size_t keep = std::min(top_n, order.size());
  for (Index t = 0; t < w.cols(); ++t) {
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Index a, Index b) {
                        if (w(a, t) != w(b, t)) return w(a, t) > w(b, t);
                        return vocab.term(static_cast<std::size_t>(a)) < vocab.term(static_cast<std::size_t>(b));
                      });
    std::vector<TermWeight> terms;
    terms.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      terms.push_back({vocab.term(static_cast<std::size_t>(order[i])), w(order[i], t)});
    }
    topics.push_back(std::move(terms));
  }
  return topics;
}

TopicModel fit_split(const SparseXd& x, const SparseXd& m, const Vocabulary& vocab, const SplitConfig& config) {
  TopicModel model;
  auto fx = factorize_x(x, clamp_scan(config.selection_x, std::min(x.rows(), x.cols())));
  auto fm = factorize_m(m, clamp_scan(config.selection_m, m.rows()));
  model.k1 = fx.W.cols();
  model.k2 = fm.W.cols();
  const auto wcat = concat_normalized(fx.W, fm.W);
  auto fj = joint_factorize(wcat, joint_selection(config.selection_joint, model.k1, model.k2, config.auto_joint_range));
  model.W = fj.W;
  model.k = model.W.cols();
  model.H = final_regression(x, model.W, config.selection_x.nmf);
  model.assignments = assign_documents(model.H);
  model.topics = top_words(model.W, vocab, config.top_n_words);
  model.report_x = std::move(fx.report);
  model.report_m = std::move(fm.report);
  model.report_joint = std::move(fj.report);
  return model;
}

// ---------------------------------------------------------------------------
// Workspace-backed stages

namespace {

class StageContext {
 public:
  StageContext(const SplitConfig& config, const RunOptions& options)
      : dir_(options.workspace), resume_(options.resume) {
    if (dir_.empty()) throw Error(ErrorKind::InvalidConfig, "no workspace directory given");
    fs::create_directories(dir_);
    manifest_ = RunManifest::load(path("manifest.json")).value_or(RunManifest{});
    manifest_.tool_version = SENMFK_VERSION;
    settings_ = to_json(config);
    auto snapshot = settings_;
    for (const auto& [key, value] : options.extra_settings.items()) {
      if (key != "threads") snapshot[key] = value;
    }
    manifest_.config = snapshot;
    if (options.extra_settings.contains("threads")) manifest_.config["threads"] = options.extra_settings["threads"];
  }

  std::string path(const std::string& file) const { return (dir_ / file).string(); }
  RunManifest& manifest() { return manifest_; }

  /// Runs `body` unless resuming and the recorded stage still matches.
  /// `keys` select the settings the stage depends on; `inputs` are absolute
  /// or workspace-relative paths; `outputs` are workspace file names.
  template <typename Body>
  bool run(const std::string& stage, const std::vector<std::string>& keys, const std::vector<std::string>& inputs,
           const std::vector<std::string>& outputs, Body&& body) {
    nlohmann::json used = nlohmann::json::object();
    for (const auto& key : keys) used[key] = settings_.at(key);
    std::string material = stage + "\n" + used.dump() + "\n";
    for (const auto& in : inputs) {
      const auto p = fs::path(in).is_absolute() ? in : path(in);
      if (!fs::exists(p)) {
        throw Error(ErrorKind::Io, "missing input '" + p + "'").with_stage(stage);
      }
      material += fs::path(in).filename().string() + " " + sha256_file(p) + "\n";
    }
    const auto fingerprint = sha256_hex(material);

    if (resume_ && up_to_date(stage, fingerprint)) {
      std::cerr << "[" << stage << "] up to date, skipped\n";
      return false;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const Error& e) {
      throw e.with_stage(stage);
    }
    StageRecord record{stage, fingerprint, {}, 0.0};
    for (const auto& out : outputs) record.outputs[out] = sha256_file(path(out));
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest_.upsert(std::move(record));
    manifest_.save(path("manifest.json"));
    return true;
  }

  void record_input(const std::string& p) {
    manifest_.inputs[p] = sha256_file(p);
    manifest_.save(path("manifest.json"));
  }

 private:
  bool up_to_date(const std::string& stage, const std::string& fingerprint) const {
    const auto* rec = manifest_.find(stage);
    if (rec == nullptr || rec->fingerprint != fingerprint || rec->outputs.empty()) return false;
    for (const auto& [file, digest] : rec->outputs) {
      const auto p = path(file);
      if (!fs::exists(p) || sha256_file(p) != digest) return false;
    }
    return true;
  }

  fs::path dir_;
  bool resume_;
  nlohmann::json settings_;
  RunManifest manifest_;
};

void preprocess_stage(StageContext& ctx, const std::string& corpus_path, const SplitConfig& config) {
  ctx.record_input(corpus_path);
  ctx.run("preprocess", {"min_doc_tokens", "min_df", "max_df_ratio", "stopwords_digest"},
          {fs::absolute(corpus_path).string()}, {"corpus.jsonl", "vocab.txt"}, [&] {
    const auto raw = read_jsonl_corpus(corpus_path);
    const auto filtered = filter_documents(raw, config.text);
    if (filtered.empty()) {
      throw Error(ErrorKind::EmptyCorpus,
                  "no document keeps " + std::to_string(config.text.min_doc_tokens) + " tokens after stopword removal");
    }
    const auto vocab = build_vocabulary(filtered, config.text);
    const auto corpus = drop_out_of_vocabulary_documents(filtered, vocab);
    io::write_corpus(ctx.path("corpus.jsonl"), corpus);
    io::write_vocabulary(ctx.path("vocab.txt"), vocab);
  });
}

void matrices_stage(StageContext& ctx, const SplitConfig& config) {
  ctx.run("matrices", {"window", "shift"}, {"corpus.jsonl", "vocab.txt"}, {"X.mtx", "cooc.mtx", "M.mtx"}, [&] {
    const auto corpus = io::read_corpus(ctx.path("corpus.jsonl"));
    const auto vocab = io::read_vocabulary(ctx.path("vocab.txt"));
    const auto x = build_tfidf(corpus, vocab);
    const auto cooc = build_cooccurrence(corpus, vocab, config.semantic);
    const auto m = sppmi(cooc, config.semantic.shift);
    io::write_matrix_market(ctx.path("X.mtx"), x);
    io::write_matrix_market(ctx.path("cooc.mtx"), cooc);
    io::write_matrix_market(ctx.path("M.mtx"), m);
  });
}

void write_factorization(StageContext& ctx, const Factorization& f, const std::string& w_name,
                         const std::string& h_name, const std::string& tag) {
  io::write_matrix_market(ctx.path(w_name), f.W);
  io::write_matrix_market(ctx.path(h_name), f.H);
  io::write_selection_report(ctx.path("selection_" + tag + ".json"), f.report);
  io::write_trace(ctx.path("trace_" + tag + ".csv"), f.report.trace);
}

void export_stage(StageContext& ctx, const SplitConfig& config) {
  ctx.run("export", {"top_n_words"}, {"W.mtx", "H.mtx", "vocab.txt", "corpus.jsonl"},
          {"topics.json", "assignments.csv", "histogram.csv"}, [&] {
            const auto w = io::read_matrix_market_dense(ctx.path("W.mtx"));
            const auto h = io::read_matrix_market_dense(ctx.path("H.mtx"));
            const auto vocab = io::read_vocabulary(ctx.path("vocab.txt"));
            const auto corpus = io::read_corpus(ctx.path("corpus.jsonl"));
            if (static_cast<std::size_t>(h.cols()) != corpus.size()) {
              throw Error(ErrorKind::DimensionMismatch, "H columns differ from document count");
            }

            nlohmann::json topics = nlohmann::json::array();
            const auto ranked = top_words(w, vocab, config.top_n_words);
            for (std::size_t t = 0; t < ranked.size(); ++t) {
              nlohmann::json terms = nlohmann::json::array();
              for (const auto& tw : ranked[t]) terms.push_back({{"term", tw.term}, {"weight", tw.weight}});
              topics.push_back({{"topic_id", t}, {"terms", terms}});
            }
            io::write_text(ctx.path("topics.json"), topics.dump(2) + "\n");

            const auto assigned = assign_documents(h);
            std::ostringstream csv;
            csv << "doc_id,topic_id,max_weight\n";
            for (std::size_t j = 0; j < corpus.size(); ++j) {
              csv << io::csv_field(corpus.documents[j].id) << ',' << assigned.topic[j] << ','
                  << io::format_double(assigned.max_weight[j]) << '\n';
            }
            io::write_text(ctx.path("assignments.csv"), csv.str());

            std::ostringstream hist;
            hist << "topic_id,count\n";
            for (std::size_t t = 0; t < assigned.histogram.size(); ++t) hist << t << ',' << assigned.histogram[t] << '\n';
            io::write_text(ctx.path("histogram.csv"), hist.str());

            if (!assigned.zero_columns.empty()) {
              std::cerr << "warning: " << assigned.zero_columns.size()
                        << " document(s) have an all-zero H column and were assigned to topic 0\n";
            }
          });
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"preprocess", "matrices", "factorize_x", "factorize_m",
                                                 "joint",      "regression", "export"};
  return names;
}

void run_preprocess(const std::string& corpus_path, const SplitConfig& config, const RunOptions& options) {
  StageContext ctx(config, options);
  preprocess_stage(ctx, corpus_path, config);
}

void run_matrices(const SplitConfig& config, const RunOptions& options) {
  StageContext ctx(config, options);
  matrices_stage(ctx, config);
}

TopicModel run_split(const std::string& corpus_path, const SplitConfig& config, const RunOptions& options) {
  StageContext ctx(config, options);
  preprocess_stage(ctx, corpus_path, config);
  matrices_stage(ctx, config);

  ctx.run("factorize_x", {"selection_x"}, {"X.mtx"}, {"W1.mtx", "H1.mtx", "selection_x.json", "trace_x.csv"}, [&] {
    const auto x = io::read_matrix_market_sparse(ctx.path("X.mtx"));
    const auto f = factorize_x(x, clamp_scan(config.selection_x, std::min(x.rows(), x.cols())));
    write_factorization(ctx, f, "W1.mtx", "H1.mtx", "x");
  });
  ctx.run("factorize_m", {"selection_m"}, {"M.mtx"}, {"W2.mtx", "H2.mtx", "selection_m.json", "trace_m.csv"}, [&] {
    const auto m = io::read_matrix_market_sparse(ctx.path("M.mtx"));
    const auto f = factorize_m(m, clamp_scan(config.selection_m, m.rows()));
    write_factorization(ctx, f, "W2.mtx", "H2.mtx", "m");
  });
  ctx.run("joint", {"selection_joint", "auto_joint_range"}, {"W1.mtx", "W2.mtx"},
          {"W.mtx", "Hstar.mtx", "selection_joint.json", "trace_joint.csv"}, [&] {
    const auto w1 = io::read_matrix_market_dense(ctx.path("W1.mtx"));
    const auto w2 = io::read_matrix_market_dense(ctx.path("W2.mtx"));
    const auto selection = joint_selection(config.selection_joint, w1.cols(), w2.cols(), config.auto_joint_range);
    const auto f = joint_factorize(concat_normalized(w1, w2), selection);
    write_factorization(ctx, f, "W.mtx", "Hstar.mtx", "joint");
  });
  ctx.run("regression", {"selection_x"}, {"X.mtx", "W.mtx"}, {"H.mtx"}, [&] {
    const auto x = io::read_matrix_market_sparse(ctx.path("X.mtx"));
    const auto w = io::read_matrix_market_dense(ctx.path("W.mtx"));
    io::write_matrix_market(ctx.path("H.mtx"), final_regression(x, w, config.selection_x.nmf));
  });
  export_stage(ctx, config);
  return load_topic_model(options.workspace);
}

TopicModel load_topic_model(const std::string& workspace) {
  const fs::path dir(workspace);
  auto file = [&](const char* name) { return (dir / name).string(); };

  TopicModel model;
  model.W = io::read_matrix_market_dense(file("W.mtx"));
  model.H = io::read_matrix_market_dense(file("H.mtx"));
  model.assignments = assign_documents(model.H);
  model.report_x = io::read_selection_report(file("selection_x.json"));
  model.report_m = io::read_selection_report(file("selection_m.json"));
  model.report_joint = io::read_selection_report(file("selection_joint.json"));
  model.report_x.consensus_W = io::read_matrix_market_dense(file("W1.mtx"));
  model.report_m.consensus_W = io::read_matrix_market_dense(file("W2.mtx"));
  model.report_joint.consensus_W = model.W;
  model.k1 = model.report_x.consensus_W.cols();
  model.k2 = model.report_m.consensus_W.cols();
  model.k = model.W.cols();
  try {
    for (const auto& topic : nlohmann::json::parse(io::read_text(file("topics.json")))) {
      std::vector<TermWeight> terms;
      for (const auto& tw : topic.at("terms")) terms.push_back({tw.at("term").get<std::string>(), tw.at("weight").get<double>()});
      model.topics.push_back(std::move(terms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, file("topics.json") + ": " + e.what());
  }
  return model;
}

}  // namespace senmfk
