#include <sstream>

#include "bsgd/data.hpp"
#include "bsgd/rng.hpp"
#include "doctest.h"

using namespace bsgd;

TEST_CASE("parse_libsvm reads the documented example") {
  std::istringstream in("+1 1:0.5 3:2\n-1 2:1\n");
  const Dataset ds = parse_libsvm(in);
  CHECK(ds.n == 2);
  CHECK(ds.d == 3);
  REQUIRE(ds.rows.size() == 2);
  CHECK(ds.rows[0].idx == std::vector<int>{0, 2});
  CHECK(ds.rows[0].val == std::vector<double>{0.5, 2.0});
  CHECK(ds.rows[1].idx == std::vector<int>{1});
  CHECK(ds.labels == std::vector<double>{1.0, -1.0});
}

TEST_CASE("parse_libsvm edge cases") {
  SUBCASE("empty stream yields an empty dataset") {
    std::istringstream in("");
    const Dataset ds = parse_libsvm(in);
    CHECK(ds.n == 0);
    CHECK(ds.d == 0);
  }
  SUBCASE("comments and blank lines are skipped") {
    std::istringstream in("# header\n\n+1 1:2 # trailing\n");
    const Dataset ds = parse_libsvm(in);
    CHECK(ds.n == 1);
    CHECK(ds.rows[0].val == std::vector<double>{2.0});
  }
  SUBCASE("non-numeric token reports the line") {
    std::istringstream in("+1 1:0.5\n-1 2:abc\n");
    CHECK_THROWS_WITH(parse_libsvm(in), "parse error at line 2");
  }
  SUBCASE("non-increasing indices report the line") {
    std::istringstream in("+1 3:1 2:1\n");
    CHECK_THROWS_WITH(parse_libsvm(in), "index order error at line 1");
  }
  SUBCASE("zero or negative indices are rejected") {
    std::istringstream in("+1 0:1\n");
    CHECK_THROWS_WITH(parse_libsvm(in), "parse error at line 1");
  }
}

TEST_CASE("parse/serialize round trip preserves all pairs") {
  RandomnessStream rng(21);
  Dataset ds;
  ds.n = 50;
  for (int i = 0; i < ds.n; ++i) {
    ds.labels.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
    SparseRow row;
    int idx = 0;
    for (int k = 0; k < 6; ++k) {
      idx += 1 + static_cast<int>(rng.below(5));
      row.idx.push_back(idx - 1);
      row.val.push_back(rng.normal() * std::pow(10.0, rng.uniform(-3, 3)));
      ds.d = std::max(ds.d, idx);
    }
    ds.rows.push_back(row);
  }
  std::istringstream in(write_libsvm(ds));
  const Dataset back = parse_libsvm(in);
  REQUIRE(back.n == ds.n);
  CHECK(back.d == ds.d);
  for (int i = 0; i < ds.n; ++i) {
    CHECK(back.labels[i] == ds.labels[i]);
    CHECK(back.rows[i].idx == ds.rows[i].idx);
    for (std::size_t k = 0; k < ds.rows[i].val.size(); ++k)
      CHECK(back.rows[i].val[k] == ds.rows[i].val[k]);  // bit-exact
  }
}

TEST_CASE("binarize_labels") {
  Dataset ds;
  SUBCASE("{0,1} maps to {-1,+1}") {
    ds.labels = {0.0, 1.0, 0.0};
    CHECK(binarize_labels(ds) == std::vector<double>{-1.0, 1.0, -1.0});
  }
  SUBCASE("already signed labels are unchanged") {
    ds.labels = {-1.0, 1.0, -1.0};
    CHECK(binarize_labels(ds) == ds.labels);
  }
  SUBCASE("three classes are rejected") {
    ds.labels = {1.0, 2.0, 3.0};
    CHECK_THROWS_WITH(binarize_labels(ds), "not a binary problem");
  }
  SUBCASE("lexicographic order decides the signs") {
    ds.labels = {2.0, 4.0};
    CHECK(binarize_labels(ds) == std::vector<double>{-1.0, 1.0});
  }
}
