#pragma once

// Generators whose ground truth is known by construction.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "senmfk/types.hpp"

namespace synth {

using senmfk::Index;
using senmfk::MatrixXd;
using senmfk::SparseXd;

struct Planted {
  MatrixXd W;
  MatrixXd H;
  SparseXd X;
};

/// Topics with disjoint row supports (row i belongs to topic i mod k), so
/// every topic is separable; each document mixes a random subset of topics.
/// X = W H with entrywise multiplicative noise of half-width `noise`.
inline Planted separated_topics(Index rows, Index cols, Index k, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Planted p;
  p.W = MatrixXd::Zero(rows, k);
  for (Index i = 0; i < rows; ++i) p.W(i, i % k) = 0.5 + u(rng);
  p.H.resize(k, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index t = 0; t < k; ++t) p.H(t, j) = u(rng) < 0.5 ? u(rng) : 0.05 * u(rng);
  }
  MatrixXd x = p.W * p.H;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) x(i, j) *= 1.0 + noise * (2.0 * u(rng) - 1.0);
  }
  p.X = x.sparseView();
  return p;
}

inline std::string topic_word(int topic, int index) {
  const char* letters = "abcdefghijklmnopqrstuvwxyz";
  std::string w = "w";
  w += letters[topic % 26];
  w += letters[(index / 26) % 26];
  w += letters[index % 26];
  return w;
}

struct LabelledCorpus {
  std::vector<std::string> jsonl_lines;
  std::vector<int> labels;
};

/// Documents drawn from `topics` disjoint word distributions (uniform over
/// `words_per_topic` words each); document d belongs to topic d mod topics.
inline LabelledCorpus disjoint_topic_corpus(int docs, int topics, int words_per_topic, int doc_len,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, words_per_topic - 1);
  LabelledCorpus out;
  for (int d = 0; d < docs; ++d) {
    const int t = d % topics;
    std::string text;
    for (int i = 0; i < doc_len; ++i) text += (i ? " " : "") + topic_word(t, pick(rng));
    out.jsonl_lines.push_back("{\"id\": \"doc" + std::to_string(d) + "\", \"text\": \"" + text + "\"}");
    out.labels.push_back(t);
  }
  return out;
}

/// Fraction of documents whose cluster's majority label equals their own.
inline double purity(const std::vector<int>& clusters, const std::vector<int>& labels) {
  int k = 0, l = 0;
  for (int c : clusters) k = std::max(k, c + 1);
  for (int v : labels) l = std::max(l, v + 1);
  std::vector<std::vector<int>> table(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(l), 0));
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][labels[i]];
  int hit = 0;
  for (const auto& row : table) hit += *std::max_element(row.begin(), row.end());
  return static_cast<double>(hit) / static_cast<double>(clusters.size());
}

}  // namespace synth
