#ifndef KLEST_MATRIX_MARKET_HPP
#define KLEST_MATRIX_MARKET_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "klest/types.hpp"

namespace klest {

enum class MatrixMarketLayout { array, coordinate };

// MatrixMarket reader: "matrix array|coordinate real|integer
// general|symmetric|skew-symmetric". Pattern and complex fields are rejected.
Matrix read_matrix_market(std::istream& in);
Matrix read_matrix_market(const std::filesystem::path& path);

// Values are written with 17 significant digits so that read(write(A)) == A
// bit for bit. Coordinate output lists every nonzero, column-major.
void write_matrix_market(std::ostream& out, const Matrix& a,
                         MatrixMarketLayout layout = MatrixMarketLayout::array);
void write_matrix_market(const std::filesystem::path& path, const Matrix& a,
                         MatrixMarketLayout layout = MatrixMarketLayout::array);

// Plain vectors: one value per line; blank lines and lines starting with
// '#' or '%' are ignored.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);
void write_vector(std::ostream& out, const Vector& v);
void write_vector(const std::filesystem::path& path, const Vector& v);

/// 17 significant digits, "%.17g".
std::string format_double(double value);

}  // namespace klest

#endif  // KLEST_MATRIX_MARKET_HPP
