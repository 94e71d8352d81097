#pragma once

#include <string>
#include <vector>

#include "levgc/linalg.hpp"

namespace levgc {

// Shortest round-trip decimal form; keeps repeated runs byte-identical.
std::string format_double(double x);

Matrix read_matrix_csv(const std::string& path);
Vector read_vector_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& M);
void write_vector_csv(const std::string& path, const Vector& v);

// One nonnegative completion time per line; blank lines ignored.
std::vector<double> read_trace(const std::string& path);

}  // namespace levgc
