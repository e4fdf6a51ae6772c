#include "spdc/datamat.hpp"
#include "spdc/error.hpp"
#include "spdc/rng.hpp"
#include "spdc/synth.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace spdc;

namespace {

sparse_dataset parse(const std::string& text, bool normalize = false) {
  std::istringstream in(text);
  load_options opts;
  opts.normalize = normalize;
  return parse_libsvm(in, opts);
}

}  // namespace

TEST_CASE("two-line file") {
  auto ds = parse("+1 1:2\n-1 1:1\n");
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 1);
  CHECK(ds.row_norms()[0] == 2.0);
  CHECK(ds.row_norms()[1] == 1.0);
  CHECK(ds.label(0) == 1.0);
  CHECK(ds.label(1) == -1.0);

  auto nz = parse("+1 1:2\n-1 1:1\n", true);
  CHECK(nz.row_norms()[0] == 1.0);
  CHECK(nz.row_norms()[1] == 1.0);
}

TEST_CASE("comments, blank lines and extended dimension") {
  auto ds = parse("# header\n\n1 2:1.5 7:-2 # trailing\n-1 3:4\n");
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 7);
  CHECK(ds.at_row_major(0, 6) == -2.0);
  CHECK(ds.at_row_major(0, 0) == 0.0);
  CHECK(ds.nnz() == 3);
}

TEST_CASE("malformed input") {
  SUBCASE("bad token reports its line") {
    try {
      parse("1 1:1\n1 2-3\n");
      FAIL("expected a parse error");
    } catch (const parse_error& e) {
      CHECK(e.line() == 2);
    }
  }
  CHECK_THROWS_AS(parse("1 2:1 2:3\n"), parse_error);
  CHECK_THROWS_AS(parse("1 3:1 2:3\n"), parse_error);
  CHECK_THROWS_AS(parse("1 0:1\n"), parse_error);
  CHECK_THROWS_AS(parse("x 1:1\n"), parse_error);
  CHECK_THROWS_AS(parse("1 1:abc\n"), parse_error);
  CHECK_THROWS_AS(parse("1 1:0\n"), validation_error);
  CHECK_THROWS_AS(parse("1\n"), validation_error);
  CHECK_THROWS_AS(parse("2 1:1\n"), validation_error);
  CHECK_THROWS_AS(load_libsvm("/nonexistent/file.svm"), validation_error);
}

TEST_CASE("regression labels are accepted in regression mode") {
  std::istringstream in("0.25 1:1\n-3 2:1\n");
  load_options opts;
  opts.mode = label_mode::regression;
  auto ds = parse_libsvm(in, opts);
  CHECK(ds.label(0) == 0.25);
}

TEST_CASE("lambda_max") {
  auto a = sparse_dataset::from_dense(Eigen::MatrixXd{{2.0}, {1.0}}, Eigen::VectorXd{{1.0, 1.0}});
  CHECK(lambda_max(a) == doctest::Approx(1.5).epsilon(1e-15));
  auto b = sparse_dataset::from_dense(Eigen::MatrixXd{{1.0}, {1.0}}, Eigen::VectorXd{{1.0, -1.0}});
  CHECK(lambda_max(b) == 0.0);
  auto c = sparse_dataset::from_dense(Eigen::MatrixXd{{3.0}}, Eigen::VectorXd{{1.0}});
  CHECK(lambda_max(c) == 3.0);
  CHECK_THROWS_AS(lambda_max(sparse_dataset{}), validation_error);
}

TEST_CASE("density") {
  auto a = sparse_dataset::from_dense(Eigen::MatrixXd{{1.0, 0.0}, {0.0, 2.0}},
                                      Eigen::VectorXd{{1.0, -1.0}});
  CHECK(density(a) == 0.5);
  auto b = sparse_dataset::from_dense(Eigen::MatrixXd{{1.0, 3.0}, {4.0, 2.0}},
                                      Eigen::VectorXd{{1.0, -1.0}});
  CHECK(density(b) == 1.0);
}

TEST_CASE("row and column stores agree") {
  synth_options so;
  so.n = 80;
  so.d = 40;
  so.density = 0.2;
  so.seed = 11;
  auto ds = synth(so);
  rng gen(5);
  for (int t = 0; t < 5000; ++t) {
    const auto i = gen.uniform_index(ds.n()), j = gen.uniform_index(ds.d());
    REQUIRE(ds.at_row_major(i, j) == ds.at_col_major(i, j));
  }
  std::size_t col_nnz = 0;
  for (std::size_t j = 0; j < ds.d(); ++j) col_nnz += ds.col(j).nnz();
  CHECK(col_nnz == ds.nnz());
  for (std::size_t i = 0; i < ds.n(); ++i)
    CHECK(std::abs(ds.row_norms()[i] - std::sqrt(ds.row(i).squared_norm())) <=
          1e-12 * ds.row_norms()[i]);
}

TEST_CASE("products match a dense copy") {
  synth_options so;
  so.n = 30;
  so.d = 12;
  so.density = 0.4;
  auto ds = synth(so);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(30, 12);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 12; ++j) dense(i, j) = ds.at_row_major(i, j);
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(12, -1.0, 2.0);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(30, 0.5, -0.5);
  CHECK((ds.multiply(w) - dense * w).norm() < 1e-12);
  CHECK((ds.multiply_transpose(v) - dense.transpose() * v).norm() < 1e-12);
}

TEST_CASE("serialize then parse is the identity") {
  for (std::uint64_t seed : {1, 2, 3}) {
    synth_options so;
    so.n = 50;
    so.d = 20;
    so.density = 0.3;
    so.seed = seed;
    auto ds = synth(so);
    std::stringstream buf;
    write_libsvm(buf, ds);
    load_options opts;
    opts.min_features = ds.d();
    auto back = parse_libsvm(buf, opts);
    CHECK(back == ds);
  }
}

TEST_CASE("normalizing twice changes nothing") {
  synth_options so;
  so.n = 60;
  so.d = 10;
  so.seed = 9;
  auto once = synth(so).normalized();
  auto twice = once.normalized();
  CHECK(once == twice);
  for (std::size_t i = 0; i < once.n(); ++i)
    CHECK(once.row_norms()[i] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("w8a dimensions and density (needs SPDC_W8A)") {
  const char* path = std::getenv("SPDC_W8A");
  if (!path) {
    MESSAGE("SPDC_W8A not set; skipping");
    return;
  }
  auto ds = load_libsvm(path);
  CHECK(ds.n() == 45546);
  CHECK(ds.d() == 300);
  CHECK(std::abs(density(ds) - 0.042418) <= 1e-6);
}
