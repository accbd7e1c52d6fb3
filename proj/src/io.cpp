#include "senmfk/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "senmfk/error.hpp"

namespace senmfk::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  return in;
}

// Skips the banner and '%' comments; returns the size line.
std::string read_header(std::istream& in, const std::string& path, const std::string& expected_kind) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
    throw Error(ErrorKind::Parse, path + ": missing MatrixMarket banner");
  }
  if (line.find(expected_kind) == std::string::npos || line.find("real") == std::string::npos ||
      line.find("general") == std::string::npos) {
    throw Error(ErrorKind::Parse, path + ": expected '" + expected_kind + " real general', got '" + line + "'");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') return line;
  }
  throw Error(ErrorKind::Parse, path + ": missing size line");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_matrix_market(const std::string& path, const SparseXd& m) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseXd::InnerIterator it(m, i); it; ++it) {
      out << (i + 1) << ' ' << (it.col() + 1) << ' ' << format_double(it.value()) << '\n';
    }
  }
}

SparseXd read_matrix_market_sparse(const std::string& path) {
  auto in = open_in(path);
  std::istringstream size(read_header(in, path, "coordinate"));
  Index rows = 0, cols = 0, nnz = 0;
  if (!(size >> rows >> cols >> nnz)) throw Error(ErrorKind::Parse, path + ": bad size line");
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (Index e = 0; e < nnz; ++e) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw Error(ErrorKind::Parse, path + ": truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols) throw Error(ErrorKind::Parse, path + ": index out of range");
    if (v != 0.0) triplets.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  SparseXd m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const std::string& path, const MatrixXd& m) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
  }
}

MatrixXd read_matrix_market_dense(const std::string& path) {
  auto in = open_in(path);
  std::istringstream size(read_header(in, path, "array"));
  Index rows = 0, cols = 0;
  if (!(size >> rows >> cols)) throw Error(ErrorKind::Parse, path + ": bad size line");
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (!(in >> m(i, j))) throw Error(ErrorKind::Parse, path + ": truncated value list");
    }
  }
  return m;
}

void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < vocab.size(); ++i) out << vocab.term(i) << '\t' << vocab.doc_freq(i) << '\n';
}

Vocabulary read_vocabulary(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorKind::Parse, path + ": expected 'term<TAB>doc_freq'");
    terms.push_back(line.substr(0, tab));
    df.push_back(std::stoul(line.substr(tab + 1)));
  }
  return Vocabulary(std::move(terms), std::move(df));
}

void write_corpus(const std::string& path, const Corpus& corpus) {
  auto out = open_out(path);
  for (const auto& doc : corpus.documents) {
    out << nlohmann::json{{"id", doc.id}, {"tokens", doc.tokens}}.dump() << '\n';
  }
}

Corpus read_corpus(const std::string& path) {
  auto in = open_in(path);
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      corpus.documents.push_back({obj.at("id").get<std::string>(), obj.at("tokens").get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
  }
  return corpus;
}

void write_trace(const std::string& path, const std::vector<TracePoint>& trace) {
  auto out = open_out(path);
  out << "iteration,relative_error\n";
  for (const auto& p : trace) out << p.iteration << ',' << format_double(p.relative_error) << '\n';
}

void write_selection_report(const std::string& path, const SelectionReport& report) {
  nlohmann::json per_k = nlohmann::json::array();
  for (const auto& r : report.per_k) {
    per_k.push_back({{"k", r.k},
                     {"min_silhouette", r.min_silhouette},
                     {"mean_silhouette", r.mean_silhouette},
                     {"relative_error", r.relative_error}});
  }
  const nlohmann::json doc = {{"per_k", per_k}, {"chosen_k", report.chosen_k}, {"fallback", report.fallback}};
  write_text(path, doc.dump(2) + "\n");
}

SelectionReport read_selection_report(const std::string& path) {
  try {
    const auto doc = nlohmann::json::parse(read_text(path));
    SelectionReport report;
    for (const auto& r : doc.at("per_k")) {
      report.per_k.push_back({r.at("k").get<Index>(), r.at("min_silhouette").get<double>(),
                              r.at("mean_silhouette").get<double>(), r.at("relative_error").get<double>()});
    }
    report.chosen_k = doc.at("chosen_k").get<Index>();
    report.fallback = doc.at("fallback").get<bool>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
}

std::string read_text(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace senmfk::io
