#include "klest/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace klest {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, long line) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("cannot parse number '" + std::string(token) + "'", line);
  return value;
}

long parse_index(std::string_view token, long line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("cannot parse integer '" + std::string(token) + "'", line);
  return value;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Next line that is neither blank nor a '%' comment.
bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty MatrixMarket stream", 0);
  ++lineno;
  auto header = split(line);
  if (header.size() != 5 || lower(std::string(header[0])) != "%%matrixmarket")
    throw ParseError("missing %%MatrixMarket banner", lineno);
  const std::string object = lower(std::string(header[1]));
  const std::string layout = lower(std::string(header[2]));
  const std::string field = lower(std::string(header[3]));
  const std::string symmetry = lower(std::string(header[4]));
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", lineno);
  if (layout != "array" && layout != "coordinate")
    throw ParseError("unsupported layout '" + layout + "'", lineno);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unsupported field '" + field + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool sym = symmetry == "symmetric";
  const bool skew = symmetry == "skew-symmetric";

  if (!next_data_line(in, line, lineno)) throw ParseError("missing size line", lineno);
  auto size = split(line);
  const std::size_t want = layout == "array" ? 2 : 3;
  if (size.size() != want) throw ParseError("malformed size line", lineno);
  const long m = parse_index(size[0], lineno);
  const long n = parse_index(size[1], lineno);
  if (m <= 0 || n <= 0) throw ParseError("matrix dimensions must be positive", lineno);
  if ((sym || skew) && m != n) throw ParseError("symmetric matrix must be square", lineno);

  Matrix a = Matrix::Zero(m, n);
  if (layout == "array") {
    // Column-major; symmetric storage lists the lower triangle only.
    for (long j = 0; j < n; ++j) {
      const long start = sym ? j : (skew ? j + 1 : 0);
      for (long i = start; i < m; ++i) {
        if (!next_data_line(in, line, lineno))
          throw ParseError("unexpected end of data at entry (" + std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + ")",
                           lineno);
        auto tok = split(line);
        if (tok.size() != 1) throw ParseError("expected one value per line", lineno);
        const double v = parse_double(tok[0], lineno);
        a(i, j) = v;
        if (sym) a(j, i) = v;
        if (skew) a(j, i) = -v;
      }
    }
  } else {
    const long nnz = parse_index(size[2], lineno);
    if (nnz < 0) throw ParseError("negative entry count", lineno);
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line, lineno))
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e),
                         lineno);
      auto tok = split(line);
      if (tok.size() != 3) throw ParseError("expected 'row col value'", lineno);
      const long i = parse_index(tok[0], lineno);
      const long j = parse_index(tok[1], lineno);
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError("entry index out of range", lineno);
      const double v = parse_double(tok[2], lineno);
      a(i - 1, j - 1) = v;
      if (sym && i != j) a(j - 1, i - 1) = v;
      if (skew && i != j) a(j - 1, i - 1) = -v;
    }
  }
  if (next_data_line(in, line, lineno)) throw ParseError("trailing data after matrix", lineno);
  return a;
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  }
}

void write_matrix_market(std::ostream& out, const Matrix& a, MatrixMarketLayout layout) {
  if (layout == MatrixMarketLayout::array) {
    out << "%%MatrixMarket matrix array real general\n" << a.rows() << ' ' << a.cols() << '\n';
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) out << format_double(a(i, j)) << '\n';
  } else {
    const Eigen::Index nnz = (a.array() != 0.0).count();
    out << "%%MatrixMarket matrix coordinate real general\n"
        << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        if (a(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(a(i, j)) << '\n';
  }
  if (!out) throw IoError("failed writing MatrixMarket data");
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& a,
                         MatrixMarketLayout layout) {
  auto out = open_out(path);
  write_matrix_market(out, a, layout);
}

Vector read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == '%') continue;
    values.push_back(parse_double(t, lineno));
  }
  if (values.empty()) throw ParseError("vector file contains no values", lineno);
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector read_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_vector(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  for (double x : v) out << format_double(x) << '\n';
  if (!out) throw IoError("failed writing vector data");
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = open_out(path);
  write_vector(out, v);
}

}  // namespace klest
