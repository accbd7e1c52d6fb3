#pragma once

// Brute-force reference implementations. They share no code with the library
// and use plain nested vectors so they cannot inherit its bugs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;  // [row][col]
using Docs = std::vector<std::vector<std::string>>;

inline Dense zeros(std::size_t rows, std::size_t cols) { return Dense(rows, std::vector<double>(cols, 0.0)); }

inline long find_term(const std::vector<std::string>& vocab, const std::string& t) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i] == t) return static_cast<long>(i);
  }
  return -1;
}

/// tf * (ln((1+n)/(1+df)) + 1), unit L2 columns. df counted over `docs`.
inline Dense tfidf(const Docs& docs, const std::vector<std::string>& vocab) {
  const std::size_t m = vocab.size(), n = docs.size();
  Dense out = zeros(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), vocab[i]) > 0 ? 1 : 0;
    const double idf = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      out[i][j] = static_cast<double>(std::count(docs[j].begin(), docs[j].end(), vocab[i])) * idf;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += out[i][j] * out[i][j];
    for (std::size_t i = 0; i < m; ++i) out[i][j] /= std::sqrt(s);
  }
  return out;
}

/// Every position pair p < q with q - p < window, both in vocabulary.
inline Dense cooccurrence(const Docs& docs, const std::vector<std::string>& vocab, std::size_t window) {
  Dense c = zeros(vocab.size(), vocab.size());
  for (const auto& d : docs) {
    for (std::size_t p = 0; p < d.size(); ++p) {
      for (std::size_t q = 0; q < d.size(); ++q) {
        if (q <= p || q - p >= window) continue;
        const long a = find_term(vocab, d[p]);
        const long b = find_term(vocab, d[q]);
        if (a < 0 || b < 0) continue;
        c[a][b] += 1.0;
        c[b][a] += 1.0;
      }
    }
  }
  return c;
}

inline Dense sppmi(const Dense& c, double shift) {
  const std::size_t m = c.size();
  std::vector<double> r(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) r[i] += c[i][j];
    total += r[i];
  }
  Dense out = zeros(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (c[i][j] == 0.0) continue;
      out[i][j] = std::max(std::log(c[i][j] * total / (r[i] * r[j])) - std::log(shift), 0.0);
    }
  }
  return out;
}

/// Textbook silhouette with cosine distance; points are rows of `pts`.
inline std::vector<double> silhouette(const Dense& pts, const std::vector<int>& labels) {
  const std::size_t n = pts.size();
  auto cosdist = [&](std::size_t a, std::size_t b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t d = 0; d < pts[a].size(); ++d) {
      dot += pts[a][d] * pts[b][d];
      na += pts[a][d] * pts[a][d];
      nb += pts[b][d] * pts[b][d];
    }
    return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
  };
  std::set<int> clusters(labels.begin(), labels.end());
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> acc;  // label -> (sum, count)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      acc[labels[j]].first += cosdist(i, j);
      acc[labels[j]].second += 1;
    }
    if (acc[labels[i]].second == 0) continue;  // singleton
    const double a = acc[labels[i]].first / acc[labels[i]].second;
    double b = std::numeric_limits<double>::infinity();
    for (int c : clusters) {
      if (c != labels[i]) b = std::min(b, acc[c].first / acc[c].second);
    }
    const double mx = std::max(a, b);
    s[i] = mx > 0 ? (b - a) / mx : 0.0;
  }
  return s;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense c = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline double residual(const Dense& x, const Dense& w, const Dense& h) {
  const Dense wh = matmul(w, h);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[0].size(); ++j) s += (x[i][j] - wh[i][j]) * (x[i][j] - wh[i][j]);
  return s;
}

/// Non-negative least squares min ||X - W H||^2 over H >= 0 by projected
/// gradient with fixed step 1/L (L from power iteration on W'W).
inline Dense projected_gradient_nnls(const Dense& x, const Dense& w, int iterations = 200000) {
  const std::size_t m = x.size(), n = x[0].size(), k = w[0].size();
  Dense g = zeros(k, k), wtx = zeros(k, n);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t i = 0; i < m; ++i) g[a][b] += w[i][a] * w[i][b];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) wtx[a][j] += w[i][a] * x[i][j];
  }
  std::vector<double> v(k, 1.0);
  double lipschitz = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> nv(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) nv[a] += g[a][b] * v[b];
    double norm = 0.0;
    for (double e : nv) norm += e * e;
    norm = std::sqrt(norm);
    lipschitz = norm;
    for (std::size_t a = 0; a < k; ++a) v[a] = nv[a] / norm;
  }
  const double step = 1.0 / (1.01 * lipschitz);
  Dense h = zeros(k, n);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> grad(k, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) grad[a] += g[a][b] * h[b][j];
        grad[a] -= wtx[a][j];
      }
      for (std::size_t a = 0; a < k; ++a) h[a][j] = std::max(0.0, h[a][j] - step * grad[a]);
    }
  }
  return h;
}

}  // namespace oracle
