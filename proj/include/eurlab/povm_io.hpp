#pragma once

// Plain-text operator format:
//
//   dim N
//   re,im re,im ...     (N rows of N entries)
//
// A POVM file is a sequence of such blocks separated by lines holding
// `---`, optionally followed by a trailer line `null: k` naming the null
// element by zero-based index. Lines starting with '#' are ignored.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "eurlab/operators.hpp"

namespace eurlab::io {

Matrix parse_operator(const std::string& text);
MatrixPovm parse_povm(const std::string& text);

MatrixPovm read_povm(const std::filesystem::path& path);

void write_operator(std::ostream& out, const Matrix& op);
void write_povm(std::ostream& out, const MatrixPovm& povm);

std::string format_operator(const Matrix& op);
std::string format_povm(const MatrixPovm& povm);

}  // namespace eurlab::io
