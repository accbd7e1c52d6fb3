#include <doctest.h>

#include <functional>
#include <random>

#include "scratch.hpp"
#include "senmfk/io.hpp"
#include "senmfk/manifest.hpp"

using namespace senmfk;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("MatrixMarket round trips are exact") {
  scratch::Dir dir("io_mm");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Index rows = 1 + static_cast<Index>(rng() % 12), cols = 1 + static_cast<Index>(rng() % 12);
    MatrixXd dense(rows, cols);
    for (Index i = 0; i < dense.size(); ++i) {
      const double v = u(rng);
      dense.data()[i] = v < 0.4 ? 0.0 : std::exp(40.0 * (v - 0.7));
    }
    io::write_matrix_market(dir.file("d.mtx"), dense);
    CHECK(io::read_matrix_market_dense(dir.file("d.mtx")) == dense);

    const SparseXd sparse = dense.sparseView();
    io::write_matrix_market(dir.file("s.mtx"), sparse);
    const auto back = io::read_matrix_market_sparse(dir.file("s.mtx"));
    CHECK(back.nonZeros() == sparse.nonZeros());
    CHECK(MatrixXd(back) == dense);
  }
}

TEST_CASE("MatrixMarket layout") {
  scratch::Dir dir("io_layout");
  MatrixXd m(2, 2);
  m << 1, 0, 0.5, 2;
  io::write_matrix_market(dir.file("d.mtx"), m);
  CHECK(scratch::slurp(dir.file("d.mtx")) == "%%MatrixMarket matrix array real general\n2 2\n1\n0.5\n0\n2\n");
  io::write_matrix_market(dir.file("s.mtx"), SparseXd(m.sparseView()));
  const auto text = scratch::slurp(dir.file("s.mtx"));
  CHECK(text.rfind("%%MatrixMarket matrix coordinate real general\n2 2 3\n", 0) == 0);

  SUBCASE("empty sparse matrix") {
    io::write_matrix_market(dir.file("z.mtx"), SparseXd(3, 4));
    const auto z = io::read_matrix_market_sparse(dir.file("z.mtx"));
    CHECK(z.rows() == 3);
    CHECK(z.cols() == 4);
    CHECK(z.nonZeros() == 0);
  }
}

TEST_CASE("MatrixMarket parse errors") {
  scratch::Dir dir("io_bad");
  scratch::write_lines(dir.file("nobanner.mtx"), {"2 2", "1", "2", "3", "4"});
  scratch::write_lines(dir.file("short.mtx"), {"%%MatrixMarket matrix array real general", "2 2", "1", "2"});
  scratch::write_lines(dir.file("range.mtx"), {"%%MatrixMarket matrix coordinate real general", "2 2 1", "3 1 1.0"});
  scratch::write_lines(dir.file("kind.mtx"), {"%%MatrixMarket matrix array real general", "1 1", "1"});
  CHECK(kind_of([&] { io::read_matrix_market_dense(dir.file("nobanner.mtx")); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::read_matrix_market_dense(dir.file("short.mtx")); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::read_matrix_market_sparse(dir.file("range.mtx")); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::read_matrix_market_sparse(dir.file("kind.mtx")); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::read_matrix_market_dense(dir.file("missing.mtx")); }) == ErrorKind::Io);
}

TEST_CASE("vocabulary and corpus round trips") {
  scratch::Dir dir("io_text");
  const Vocabulary vocab({"apple", "banana", "cherry"}, {5, 7, 11});
  io::write_vocabulary(dir.file("vocab.txt"), vocab);
  CHECK(scratch::slurp(dir.file("vocab.txt")) == "apple\t5\nbanana\t7\ncherry\t11\n");
  const auto v = io::read_vocabulary(dir.file("vocab.txt"));
  CHECK(v.terms() == vocab.terms());
  CHECK(v.doc_freqs() == vocab.doc_freqs());

  Corpus corpus;
  corpus.documents.push_back({"a,1", {"apple", "banana"}});
  corpus.documents.push_back({"quote\"d", {"cherry"}});
  io::write_corpus(dir.file("c.jsonl"), corpus);
  const auto c = io::read_corpus(dir.file("c.jsonl"));
  REQUIRE(c.size() == 2);
  CHECK(c.documents[0].id == "a,1");
  CHECK(c.documents[1].tokens == std::vector<std::string>{"cherry"});

  scratch::write_lines(dir.file("bad_vocab.txt"), {"apple 5"});
  CHECK(kind_of([&] { io::read_vocabulary(dir.file("bad_vocab.txt")); }) == ErrorKind::Parse);
  scratch::write_lines(dir.file("bad.jsonl"), {"{not json"});
  CHECK(kind_of([&] { io::read_corpus(dir.file("bad.jsonl")); }) == ErrorKind::Parse);
}

TEST_CASE("selection reports and traces") {
  scratch::Dir dir("io_report");
  SelectionReport r;
  r.per_k = {{1, 1.0, 1.0, 0.5}, {2, 0.93, 0.97, 0.125}};
  r.chosen_k = 2;
  r.fallback = false;
  io::write_selection_report(dir.file("r.json"), r);
  const auto back = io::read_selection_report(dir.file("r.json"));
  CHECK(back.chosen_k == 2);
  CHECK_FALSE(back.fallback);
  REQUIRE(back.per_k.size() == 2);
  CHECK(back.per_k[1].min_silhouette == 0.93);
  CHECK(back.per_k[1].relative_error == 0.125);

  io::write_trace(dir.file("t.csv"), {{0, 1.0}, {10, 0.25}});
  CHECK(scratch::slurp(dir.file("t.csv")) == "iteration,relative_error\n0,1\n10,0.25\n");

  scratch::write_lines(dir.file("bad.json"), {R"({"per_k": []})"});
  CHECK(kind_of([&] { io::read_selection_report(dir.file("bad.json")); }) == ErrorKind::Parse);
}

TEST_CASE("csv_field and format_double") {
  CHECK(io::csv_field("plain") == "plain");
  CHECK(io::csv_field("a,b") == "\"a,b\"");
  CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("sha256 and manifests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  scratch::Dir dir("io_manifest");
  RunManifest m;
  m.config = {{"seed", 42}};
  m.inputs["in.jsonl"] = sha256_hex("x");
  m.upsert({"preprocess", "f1", {{"vocab.txt", "d1"}}, 0.5});
  m.upsert({"preprocess", "f2", {{"vocab.txt", "d2"}}, 0.25});
  m.upsert({"matrices", "f3", {}, 1.0});
  REQUIRE(m.stages.size() == 2);
  CHECK(m.find("preprocess")->fingerprint == "f2");
  m.save(dir.file("manifest.json"));
  const auto back = RunManifest::load(dir.file("manifest.json"));
  REQUIRE(back.has_value());
  CHECK(back->to_json() == m.to_json());
  CHECK_FALSE(RunManifest::load(dir.file("none.json")).has_value());
}
