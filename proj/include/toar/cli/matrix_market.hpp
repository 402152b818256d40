// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_CLI_MATRIX_MARKET_HPP
#define TOAR_CLI_MATRIX_MARKET_HPP

#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include "toar/companion.hpp"

namespace toar::mm
{

class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Dense matrices larger than this many entries are refused.
inline constexpr std::int64_t kMaxEntries = std::int64_t{1} << 26;

// Reads "matrix coordinate {real,complex} {general,symmetric,hermitian}" and
// "matrix array {real,complex} general". Symmetric and Hermitian files must list
// the lower triangle only and are expanded to full storage.
Matrix read(std::istream &in);
Matrix read_file(const std::filesystem::path &path);

// Coordinate format, general symmetry; the field is real when every imaginary part
// is zero. Values are printed in shortest round-trip form.
void write(std::ostream &out, const Matrix &m);
void write_file(const std::filesystem::path &path, const Matrix &m);

// A start file is n x 2: column 1 holds r_{-1}, column 2 holds r_0.
StartPair read_start_file(const std::filesystem::path &path);
void write_start_file(const std::filesystem::path &path, const StartPair &s);

}  // namespace toar::mm

#endif  // TOAR_CLI_MATRIX_MARKET_HPP
