#include "senmfk/text_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "senmfk/error.hpp"

namespace senmfk {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)) {
  if (terms_.size() != doc_freq_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "terms and document frequencies differ in length");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      throw Error(ErrorKind::InvalidConfig, "duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

long Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

void PipelineConfig::validate() const {
  if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "max_df_ratio must lie in (0, 1]");
  }
  if (min_df < 1) throw Error(ErrorKind::InvalidConfig, "min_df must be >= 1");
}

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : raw_text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      current.push_back(static_cast<char>(c | 0x20));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Corpus filter_documents(const Corpus& corpus, const PipelineConfig& config) {
  config.validate();
  Corpus out;
  for (const auto& doc : corpus.documents) {
    Document kept{doc.id, {}};
    kept.tokens.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) {
      if (!config.stopwords.contains(t)) kept.tokens.push_back(t);
    }
    if (kept.tokens.size() >= config.min_doc_tokens) out.documents.push_back(std::move(kept));
  }
  return out;
}

Vocabulary build_vocabulary(const Corpus& corpus, const PipelineConfig& config) {
  config.validate();
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot build a vocabulary from no documents");

  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& doc : corpus.documents) {
    std::vector<std::string_view> seen(doc.tokens.begin(), doc.tokens.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto t : seen) {
      auto it = df.find(t);
      if (it == df.end()) {
        df.emplace(std::string(t), 1);
      } else {
        ++it->second;
      }
    }
  }

  // Inclusive ceiling: a term in exactly floor(ratio * n) documents is kept.
  const auto ceiling = static_cast<std::size_t>(
      std::floor(config.max_df_ratio * static_cast<double>(corpus.size())));
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (const auto& [term, count] : df) {
    if (count >= config.min_df && count <= ceiling) {
      terms.push_back(term);
      freqs.push_back(count);
    }
  }
  if (terms.empty()) throw Error(ErrorKind::EmptyVocabulary, "no term survives the document-frequency filters");
  return Vocabulary(std::move(terms), std::move(freqs));
}

Corpus drop_out_of_vocabulary_documents(const Corpus& corpus, const Vocabulary& vocab) {
  Corpus out;
  for (const auto& doc : corpus.documents) {
    if (std::any_of(doc.tokens.begin(), doc.tokens.end(),
                    [&](const std::string& t) { return vocab.contains(t); })) {
      out.documents.push_back(doc);
    }
  }
  return out;
}

Corpus read_jsonl_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus '" + path + "'");

  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj["id"].is_string() || !obj["text"].is_string()) {
      throw Error(ErrorKind::Parse,
                  path + ":" + std::to_string(line_no) + ": expected string fields 'id' and 'text'");
    }
    auto id = obj["id"].get<std::string>();
    if (!ids.insert(id).second) throw Error(ErrorKind::DuplicateId, "document id '" + id + "'");
    corpus.documents.push_back({std::move(id), tokenize(obj["text"].get<std::string>())});
  }
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "'" + path + "' holds no documents");
  return corpus;
}

StopwordSet read_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open stopword list '" + path + "'");
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string w = line.substr(b, e - b + 1);
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(std::move(w));
  }
  return words;
}

}  // namespace senmfk
