#include <doctest.h>

#include "proxsarah/data.hpp"
#include "proxsarah/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <zlib.h>

using namespace proxsarah;

TEST_CASE("parse LIBSVM lines") {
  std::istringstream in("+1 1:0.5 3:2\r\n\n# comment\n-1 2:1   # trailing\n0 \n");
  const Dataset ds = parse_libsvm(in);
  REQUIRE(ds.size() == 3);
  CHECK(ds.dimension() == 3);
  CHECK(ds.nnz() == 3);
  const SparseRow r0 = ds.row(0);
  CHECK(r0.label == 1.0);
  CHECK(r0.indices[1] == 2);
  CHECK(r0.values[1] == 2.0);
  CHECK(ds.row(2).indices.empty());
  Vector w = Vector::Ones(3);
  CHECK(r0.dot(w) == 2.5);
  CHECK(r0.squared_norm() == 4.25);
}

TEST_CASE("parse errors carry the line number") {
  auto line_of = [](const std::string& text, const ParseOptions& opt = {}) {
    std::istringstream in(text);
    try {
      parse_libsvm(in, opt);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("1 1:1\n1 3:1 2:1\n") == 2);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("x 1:1\n") == 1);
  CHECK(line_of("1 1:1\n\n1 2:abc\n") == 3);
  CHECK(line_of("1 1:1\n1 5:1\n", ParseOptions{4}) == 2);
  CHECK(line_of("1 1:1 1:2\n") == 1);
}

TEST_CASE("write then parse round trip") {
  std::istringstream in("1 1:0.1 4:-2.5\n-1 2:3\n");
  const Dataset ds = parse_libsvm(in);
  std::ostringstream out;
  write_libsvm(out, ds);
  std::istringstream back(out.str());
  const Dataset again = parse_libsvm(back);
  REQUIRE(again.size() == ds.size());
  CHECK(again.row(0).values[0] == 0.1);
  CHECK(again.row(0).values[1] == -2.5);
  CHECK(again.row(1).label == -1.0);
}

TEST_CASE("gzip files are decompressed") {
  const auto path = std::filesystem::temp_directory_path() / "proxsarah_test_data.svm.gz";
  const std::string text = "1 1:1 2:1\n-1 3:2\n";
  gzFile f = gzopen(path.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  const Dataset ds = read_libsvm_file(path);
  CHECK(ds.size() == 2);
  CHECK(ds.dimension() == 3);
  std::filesystem::remove(path);
  CHECK_THROWS(read_libsvm_file(path));
}

TEST_CASE("label canonicalization") {
  std::istringstream in("2 1:1\n4 1:1\n2 1:1\n");
  const Dataset ds = canonicalize_labels(parse_libsvm(in));
  CHECK(ds.row(0).label == -1.0);
  CHECK(ds.row(1).label == 1.0);
  std::istringstream three("1 1:1\n2 1:1\n3 1:1\n");
  CHECK_THROWS_AS(canonicalize_labels(parse_libsvm(three)), UnsupportedOperation);
}

TEST_CASE("row normalization drops zero rows and is idempotent") {
  std::istringstream in("1 1:3 2:4\n1\n-1 2:0.5\n");
  const NormalizeResult r = normalize_rows(parse_libsvm(in));
  CHECK(r.dropped_zero_rows == 1);
  REQUIRE(r.dataset.size() == 2);
  CHECK(r.dataset.row(0).values[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.dataset.rows_unit_norm());
  const NormalizeResult again = normalize_rows(r.dataset);
  CHECK(again.dataset.row(0).values[0] == r.dataset.row(0).values[0]);
}

TEST_CASE("split sizes and determinism") {
  const Dataset ds = synth_binclass(101, 10, 3, 1.0);
  const auto [train, test] = split(ds, 0.2, 5);
  CHECK(test.size() == 20);
  CHECK(train.size() == 81);
  const auto [train2, test2] = split(ds, 0.2, 5);
  CHECK(test2.row(0).dot(Vector::Ones(10)) == test.row(0).dot(Vector::Ones(10)));
}

TEST_CASE("synthetic generators") {
  const Dataset pca = synth_nnpca(200, 30, 1);
  CHECK(pca.size() == 200);
  CHECK(pca.dimension() == 30);
  CHECK(pca.rows_unit_norm());
  for (std::size_t i = 0; i < pca.size(); ++i) {
    for (double v : pca.row(i).values) CHECK(v >= 0.0);
  }
  // With separability 1 every label agrees with the planted hyperplane.
  const Dataset bc = synth_binclass(300, 20, 2, 1.0);
  const Vector h = planted_hyperplane(20, 2);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < bc.size(); ++i) {
    const double s = bc.row(i).dot(h);
    agree += ((s >= 0.0 ? 1.0 : -1.0) == bc.row(i).label);
  }
  CHECK(agree == bc.size());
}
