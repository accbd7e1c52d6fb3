#include "senmfk/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "senmfk/io.hpp"
#include "senmfk/manifest.hpp"
#include "senmfk/split_pipeline.hpp"

namespace senmfk::cli {

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidRank:
      return kUsage;
    case ErrorKind::DegenerateMatrix:
    case ErrorKind::DegenerateBasis:
    case ErrorKind::NoStableRank:
    case ErrorKind::SingleCluster:
      return kNumerical;
    default:
      return kData;
  }
}

namespace {

// Flat settings as they appear on the command line, in config files and in
// the manifest snapshot.
struct Settings {
  std::string input;
  std::string workspace = "senmfk_workspace";
  std::size_t min_doc_tokens = 20;
  std::size_t min_df = 5;
  double max_df = 0.5;
  std::string stopwords;
  std::size_t window = 100;
  double shift = 4.0;
  Index kx_min = 1, kx_max = 10;
  Index km_min = 1, km_max = 10;
  Index kj_min = 0, kj_max = 0;  // 0 = derive from k1, k2
  int perturbations = 10;
  double delta = 0.03;
  double sil_threshold = 0.75;
  std::uint64_t seed = 42;
  int threads = 1;
  int max_iter = 1000;
  double tol = 1e-6;
  std::size_t top_n = 20;

  nlohmann::json to_json() const {
    return {{"input", input},       {"min-doc-tokens", min_doc_tokens},
            {"min-df", min_df},     {"max-df", max_df},
            {"stopwords", stopwords}, {"window", window},
            {"shift", shift},       {"kx-min", kx_min},
            {"kx-max", kx_max},     {"km-min", km_min},
            {"km-max", km_max},     {"kj-min", kj_min},
            {"kj-max", kj_max},     {"perturbations", perturbations},
            {"delta", delta},       {"sil-threshold", sil_threshold},
            {"seed", seed},         {"threads", threads},
            {"max-iter", max_iter}, {"tol", tol},
            {"top-n", top_n}};
  }

  void from_json(const nlohmann::json& j) {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("input", input);
    get("min-doc-tokens", min_doc_tokens);
    get("min-df", min_df);
    get("max-df", max_df);
    get("stopwords", stopwords);
    get("window", window);
    get("shift", shift);
    get("kx-min", kx_min);
    get("kx-max", kx_max);
    get("km-min", km_min);
    get("km-max", km_max);
    get("kj-min", kj_min);
    get("kj-max", kj_max);
    get("perturbations", perturbations);
    get("delta", delta);
    get("sil-threshold", sil_threshold);
    get("seed", seed);
    get("threads", threads);
    get("max-iter", max_iter);
    get("tol", tol);
    get("top-n", top_n);
  }

  SplitConfig to_split_config() const {
    SplitConfig c;
    c.text.min_doc_tokens = min_doc_tokens;
    c.text.min_df = min_df;
    c.text.max_df_ratio = max_df;
    if (!stopwords.empty()) c.text.stopwords = read_stopwords(stopwords);
    c.semantic.window = window;
    c.semantic.shift = shift;
    for (auto* s : {&c.selection_x, &c.selection_m, &c.selection_joint}) {
      s->n_perturbations = perturbations;
      s->delta = delta;
      s->silhouette_threshold = sil_threshold;
      s->nmf.max_iter = max_iter;
      s->nmf.tol = tol;
    }
    c.selection_x.k_min = kx_min;
    c.selection_x.k_max = kx_max;
    c.selection_m.k_min = km_min;
    c.selection_m.k_max = km_max;
    c.auto_joint_range = kj_min == 0 && kj_max == 0;
    if (!c.auto_joint_range) {
      c.selection_joint.k_min = kj_min == 0 ? 1 : kj_min;
      c.selection_joint.k_max = kj_max == 0 ? std::numeric_limits<Index>::max() / 2 : kj_max;
    }
    c.top_n_words = top_n;
    c.set_seed(seed);
    c.set_threads(threads);
    c.text.validate();
    c.semantic.validate();
    c.selection_x.validate();
    c.selection_m.validate();
    if (!c.auto_joint_range) c.selection_joint.validate();
    return c;
  }
};

void add_workspace(CLI::App& cmd, Settings& s) {
  cmd.add_option("--workspace", s.workspace, "Directory holding stage artifacts")
      ->envname("SENMFK_WORKSPACE")
      ->capture_default_str();
}

void add_text_options(CLI::App& cmd, Settings& s) {
  cmd.add_option("--min-doc-tokens", s.min_doc_tokens, "Drop documents with fewer tokens")->capture_default_str();
  cmd.add_option("--min-df", s.min_df, "Minimum document frequency of a term")->capture_default_str();
  cmd.add_option("--max-df", s.max_df, "Maximum document-frequency ratio (inclusive)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--stopwords", s.stopwords, "Stopword list, one term per line (default: bundled English)")
      ->check(CLI::ExistingFile);
}

void add_semantic_options(CLI::App& cmd, Settings& s) {
  cmd.add_option("--window", s.window, "Co-occurrence window in tokens")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--shift", s.shift, "SPPMI shift s (>= 1)")->check(CLI::Range(1.0, 1e300))->capture_default_str();
}

void add_selection_options(CLI::App& cmd, Settings& s, Index& k_min, Index& k_max) {
  cmd.add_option("--k-min", k_min, "Smallest rank scanned for X and M");
  cmd.add_option("--k-max", k_max, "Largest rank scanned for X and M");
  cmd.add_option("--kx-min", s.kx_min, "Smallest rank scanned for X")->capture_default_str();
  cmd.add_option("--kx-max", s.kx_max, "Largest rank scanned for X")->capture_default_str();
  cmd.add_option("--km-min", s.km_min, "Smallest rank scanned for M")->capture_default_str();
  cmd.add_option("--km-max", s.km_max, "Largest rank scanned for M")->capture_default_str();
  cmd.add_option("--kj-min", s.kj_min, "Smallest merged rank (default: min(k1, k2))");
  cmd.add_option("--kj-max", s.kj_max, "Largest merged rank (default and cap: k1 + k2)");
  cmd.add_option("--perturbations", s.perturbations, "Ensemble size per rank")->capture_default_str();
  cmd.add_option("--delta", s.delta, "Multiplicative perturbation half-width")->capture_default_str();
  cmd.add_option("--sil-threshold", s.sil_threshold, "Minimum silhouette for a stable rank")->capture_default_str();
  cmd.add_option("--seed", s.seed, "Base random seed")->capture_default_str();
  cmd.add_option("--threads", s.threads, "Worker threads for ensembles")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--max-iter", s.max_iter, "Multiplicative-update iteration cap")->capture_default_str();
  cmd.add_option("--tol", s.tol, "Relative objective change that stops an update loop")->capture_default_str();
  cmd.add_option("--top-n", s.top_n, "Terms kept per topic")->capture_default_str();
}

// Applies `key = value` lines to options not given on the command line.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::istringstream lines(io::read_text(path));
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r\"'");
    if (b == std::string::npos) return std::string{};
    const auto e = v.find_last_not_of(" \t\r\"'");
    return v.substr(b, e - b + 1);
  };
  while (std::getline(lines, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const auto value = trim(line.substr(eq + 1));
    CLI::Option* opt = nullptr;
    try {
      opt = cmd.get_option(key == "input" ? key : "--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw Error(ErrorKind::InvalidConfig, path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0 || key == "config") continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorKind::InvalidConfig, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunOptions options_for(const Settings& s, bool resume) {
  RunOptions o;
  o.workspace = s.workspace;
  o.resume = resume;
  o.extra_settings = s.to_json();
  if (!s.input.empty()) o.extra_settings["input"] = std::filesystem::absolute(s.input).string();
  return o;
}

int print_report(const Settings& s, std::size_t table_words, std::ostream& out) {
  const auto model = load_topic_model(s.workspace);
  out << "k1=" << model.k1 << " k2=" << model.k2 << " k=" << model.k << "\n\n";
  out << std::setw(5) << "topic" << "  " << std::setw(6) << "docs" << "  top words\n";
  for (std::size_t t = 0; t < model.topics.size(); ++t) {
    out << std::setw(5) << t << "  " << std::setw(6) << model.assignments.histogram[t] << "  ";
    const auto n = std::min(table_words, model.topics[t].size());
    for (std::size_t i = 0; i < n; ++i) out << (i ? ", " : "") << model.topics[t][i].term;
    out << '\n';
  }
  std::ostringstream hist;
  hist << "topic_id,count\n";
  for (std::size_t t = 0; t < model.assignments.histogram.size(); ++t) {
    hist << t << ',' << model.assignments.histogram[t] << '\n';
  }
  io::write_text((std::filesystem::path(s.workspace) / "histogram.csv").string(), hist.str());
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic NMF topic modelling with automatic rank selection (split factorisation)", "senmfk"};
  app.set_version_flag("--version", std::string(SENMFK_VERSION));
  app.require_subcommand(1);

  Settings s;
  std::string stage = "all";
  std::string from_manifest;
  std::size_t table_words = 5;

  auto* pre = app.add_subcommand("preprocess", "Tokenise and filter a JSONL corpus; build the vocabulary");
  pre->add_option("input", s.input, "JSONL corpus with 'id' and 'text' fields")->required()->check(CLI::ExistingFile);
  add_workspace(*pre, s);
  add_text_options(*pre, s);

  auto* mat = app.add_subcommand("matrices", "Build TF-IDF, co-occurrence and SPPMI matrices");
  add_workspace(*mat, s);
  add_semantic_options(*mat, s);

  auto* runc = app.add_subcommand("run", "Run the full pipeline");
  runc->add_option("input", s.input, "JSONL corpus with 'id' and 'text' fields")->check(CLI::ExistingFile);
  std::string config_file;
  runc->add_option("--config", config_file, "Flat key=value settings file; flags override it")
      ->check(CLI::ExistingFile);
  runc->add_option("--stage", stage, "'all' recomputes every stage; 'resume' skips stages whose inputs are unchanged")
      ->check(CLI::IsMember({"all", "resume"}))
      ->capture_default_str();
  runc->add_option("--from-manifest", from_manifest, "Re-run with the settings recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  add_workspace(*runc, s);
  add_text_options(*runc, s);
  add_semantic_options(*runc, s);
  Index k_min = 0, k_max = 0;
  add_selection_options(*runc, s, k_min, k_max);

  auto* rep = app.add_subcommand("report", "Print the topic table and rewrite histogram.csv");
  add_workspace(*rep, s);
  rep->add_option("--top", table_words, "Words per topic in the table")->capture_default_str();

  std::string stage_label = "cli";
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
        app.exit(e, out, err);
        return kSuccess;
      }
      app.exit(e, out, err);
      return kUsage;
    }

    if (pre->parsed()) {
      stage_label = "preprocess";
      run_preprocess(s.input, s.to_split_config(), options_for(s, false));
      out << "wrote corpus.jsonl and vocab.txt to " << s.workspace << '\n';
      return kSuccess;
    }
    if (mat->parsed()) {
      stage_label = "matrices";
      run_matrices(s.to_split_config(), options_for(s, false));
      out << "wrote X.mtx, cooc.mtx and M.mtx to " << s.workspace << '\n';
      return kSuccess;
    }
    if (runc->parsed()) {
      stage_label = "run";
      if (!config_file.empty()) apply_config_file(*runc, config_file);
      // Stage-specific bounds win over the shared ones.
      auto share = [&](Index value, const char* flag, Index& field) {
        if (value > 0 && runc->count(flag) == 0) field = value;
      };
      share(k_min, "--kx-min", s.kx_min);
      share(k_min, "--km-min", s.km_min);
      share(k_max, "--kx-max", s.kx_max);
      share(k_max, "--km-max", s.km_max);
      if (!from_manifest.empty()) {
        const auto manifest = RunManifest::load(from_manifest);
        const auto workspace = s.workspace;
        s.from_json(manifest->config);
        if (runc->count("--workspace") > 0 || std::getenv("SENMFK_WORKSPACE") != nullptr) s.workspace = workspace;
      }
      if (s.input.empty()) {
        err << "error: an input corpus is required (positional or via --from-manifest)\n";
        return kUsage;
      }
      const auto model = run_split(s.input, s.to_split_config(), options_for(s, stage == "resume"));
      out << "k1=" << model.k1 << " k2=" << model.k2 << " k=" << model.k << " documents=" << model.H.cols()
          << " workspace=" << s.workspace << '\n';
      return kSuccess;
    }
    stage_label = "report";
    return print_report(s, table_words, out);
  } catch (const Error& e) {
    const std::string msg = e.what();
    err << "error: " << (msg.front() == '[' ? "" : "[" + stage_label + "] ") << msg << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: [" << stage_label << "] " << e.what() << '\n';
    return kData;
  }
}

}  // namespace senmfk::cli
