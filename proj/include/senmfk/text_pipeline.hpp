#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace senmfk {

struct Document {
  std::string id;
  std::vector<std::string> tokens;
};

/// Ordered documents; the order defines the column order of the term-document matrix.
struct Corpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

/// Terms in lexicographic order with their document frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// `terms` must be unique; doc_freq is parallel to terms.
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::size_t doc_freq(std::size_t i) const { return doc_freq_[i]; }
  const std::vector<std::size_t>& doc_freqs() const { return doc_freq_; }

  /// Index of `term`, or -1 when absent.
  long index_of(std::string_view term) const;
  bool contains(std::string_view term) const { return index_of(term) >= 0; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

using StopwordSet = std::unordered_set<std::string>;

/// Bundled English stopword list.
const StopwordSet& default_stopwords();

struct PipelineConfig {
  std::size_t min_doc_tokens = 20;
  std::size_t min_df = 5;
  double max_df_ratio = 0.5;
  StopwordSet stopwords = default_stopwords();

  /// Throws InvalidConfig when a bound is out of range.
  void validate() const;
};

/// Lowercase ASCII-alphabetic runs of length >= 2. Every other byte separates.
std::vector<std::string> tokenize(std::string_view raw_text);

/// Drops stopwords, then keeps documents with at least min_doc_tokens tokens.
Corpus filter_documents(const Corpus& corpus, const PipelineConfig& config);

/// Terms with min_df <= df <= floor(max_df_ratio * n), sorted. Throws
/// EmptyCorpus on an empty corpus and EmptyVocabulary when nothing survives.
Vocabulary build_vocabulary(const Corpus& corpus, const PipelineConfig& config);

/// Removes documents holding no vocabulary term. Tokens are kept as-is so
/// co-occurrence windows still measure distance in the original sequence.
Corpus drop_out_of_vocabulary_documents(const Corpus& corpus, const Vocabulary& vocab);

/// Reads `{"id": ..., "text": ...}` lines and tokenizes each text. Blank lines
/// are skipped. Throws Parse, DuplicateId, or EmptyCorpus.
Corpus read_jsonl_corpus(const std::string& path);

/// One term per line; blank lines and surrounding whitespace ignored.
StopwordSet read_stopwords(const std::string& path);

}  // namespace senmfk
