#pragma once

#include <iosfwd>
#include <string>

#include "tlrisk/matrix.hpp"

namespace tlrisk {

// Text format shared by the CLI: one row per line, whitespace-separated
// decimal entries, '#' starts a comment line.  All rows must have the same
// number of entries.
Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix_file(const std::string& path, const Matrix& m);

// %g-style formatting with the given number of significant digits.
std::string format_sig(double value, int digits);

} // namespace tlrisk
