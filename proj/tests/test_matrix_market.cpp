#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>
#include <sstream>

#include "klest/matrix_market.hpp"

using namespace klest;

namespace {

long parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_matrix_market(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("array round trip is exact") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> d(0.0, 1e3);
  Matrix a(10, 8);
  for (Eigen::Index j = 0; j < 8; ++j)
    for (Eigen::Index i = 0; i < 10; ++i) a(i, j) = d(rng) * std::pow(10.0, double(i) - 5);
  for (auto layout : {MatrixMarketLayout::array, MatrixMarketLayout::coordinate}) {
    std::stringstream buf;
    write_matrix_market(buf, a, layout);
    const Matrix b = read_matrix_market(buf);
    REQUIRE(b.rows() == 10);
    REQUIRE(b.cols() == 8);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "klest_mm_test";
  std::filesystem::create_directories(dir);
  Matrix a{{1.0, -2.5}, {0.0, 3e-17}};
  write_matrix_market(dir / "a.mtx", a);
  CHECK(read_matrix_market(dir / "a.mtx") == a);
  Vector v{{0.1, 0.2, 0.3}};
  write_vector(dir / "v.txt", v);
  CHECK(read_vector(dir / "v.txt") == v);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coordinate and symmetric storage") {
  std::istringstream coo(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "2 3 2\n"
      "1 3 4.5\n"
      "2 1 -1\n");
  const Matrix a = read_matrix_market(coo);
  CHECK(a(0, 2) == 4.5);
  CHECK(a(1, 0) == -1.0);
  CHECK(a(0, 0) == 0.0);

  std::istringstream sym(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n"
      "1 1 2\n"
      "2 1 7\n");
  const Matrix s = read_matrix_market(sym);
  CHECK(s(0, 1) == 7.0);
  CHECK(s(1, 0) == 7.0);

  std::istringstream arr(
      "%%MatrixMarket matrix array integer symmetric\n"
      "2 2\n"
      "1\n2\n3\n");
  const Matrix t = read_matrix_market(arr);
  CHECK(t(0, 1) == 2.0);
  CHECK(t(1, 1) == 3.0);

  std::istringstream skew(
      "%%MatrixMarket matrix array real skew-symmetric\n"
      "2 2\n"
      "5\n");
  const Matrix k = read_matrix_market(skew);
  CHECK(k(1, 0) == 5.0);
  CHECK(k(0, 1) == -5.0);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(parse_error_line("%%MatrixMarket matrix array real general\n2 1\n1.0\nabc\n") == 4);
  CHECK(parse_error_line("not a banner\n") == 1);
  CHECK(parse_error_line("%%MatrixMarket matrix array complex general\n1 1\n1\n") == 1);
  CHECK(parse_error_line("%%MatrixMarket matrix array real general\n2\n") == 2);
  CHECK(parse_error_line("%%MatrixMarket matrix array real general\n1 1\n1\n2\n") == 4);
  CHECK(parse_error_line("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n") == 3);
  CHECK(parse_error_line("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n") > 0);
}

TEST_CASE("vector reader") {
  std::istringstream in("# header\n1.5\n\n-2\n% also a comment\n3e-3\n");
  const Vector v = read_vector(in);
  REQUIRE(v.size() == 3);
  CHECK(v[2] == 3e-3);

  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_vector(empty), ParseError);

  std::istringstream bad("1\n2 3\n");
  try {
    read_vector(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing file and path prefix") {
  CHECK_THROWS_AS(read_matrix_market(std::filesystem::path("/nonexistent/a.mtx")), IoError);
  const auto p = std::filesystem::temp_directory_path() / "klest_bad.mtx";
  {
    std::ofstream out(p);
    out << "%%MatrixMarket matrix array real general\n1 1\nx\n";
  }
  try {
    read_matrix_market(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
    CHECK(e.line() == 3);
  }
  std::filesystem::remove(p);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.2250738585072014e-308, 1e300})
    CHECK(std::stod(format_double(x)) == x);
}
