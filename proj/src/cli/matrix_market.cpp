// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/cli/matrix_market.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace toar::mm
{

namespace
{

enum class Field
{
  real,
  complex
};

enum class Symmetry
{
  general,
  symmetric,
  hermitian
};

struct Header
{
  bool coordinate = true;
  Field field = Field::real;
  Symmetry symmetry = Symmetry::general;
};

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
    {
      i++;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
    {
      i++;
    }
    if (i > start)
    {
      out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string &what)
{
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(std::string_view tok, std::size_t line)
{
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range)
  {
    fail(line, "integer out of range '" + std::string(tok) + "'");
  }
  if (ec != std::errc() || p != tok.data() + tok.size())
  {
    fail(line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

double parse_real(std::string_view tok, std::size_t line)
{
  if (!tok.empty() && tok.front() == '+')
  {
    tok.remove_prefix(1);
  }
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
  {
    fail(line, "expected a number, got '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v))
  {
    fail(line, "non-finite value");
  }
  return v;
}

Header parse_header(const std::string &line)
{
  const auto toks = split(line);
  if (toks.size() != 5 || lower(std::string(toks[0])) != "%%matrixmarket")
  {
    fail(1, "malformed header (expected %%MatrixMarket matrix <format> <field> <symmetry>)");
  }
  if (lower(std::string(toks[1])) != "matrix")
  {
    fail(1, "only 'matrix' objects are supported");
  }
  Header h;
  const std::string format = lower(std::string(toks[2]));
  const std::string field = lower(std::string(toks[3]));
  const std::string symmetry = lower(std::string(toks[4]));
  if (format == "coordinate")
  {
    h.coordinate = true;
  }
  else if (format == "array")
  {
    h.coordinate = false;
  }
  else
  {
    fail(1, "unknown format '" + format + "'");
  }
  if (field == "real")
  {
    h.field = Field::real;
  }
  else if (field == "complex")
  {
    h.field = Field::complex;
  }
  else
  {
    fail(1, "unsupported field '" + field + "'");
  }
  if (symmetry == "general")
  {
    h.symmetry = Symmetry::general;
  }
  else if (symmetry == "symmetric" && h.coordinate)
  {
    h.symmetry = Symmetry::symmetric;
  }
  else if (symmetry == "hermitian" && h.coordinate && h.field == Field::complex)
  {
    h.symmetry = Symmetry::hermitian;
  }
  else
  {
    fail(1, "unsupported symmetry '" + symmetry + "' for this format and field");
  }
  return h;
}

// Next line that is neither blank nor a comment.
bool next_data_line(std::istream &in, std::string &line, std::size_t &number)
{
  while (std::getline(in, line))
  {
    number++;
    const auto toks = split(line);
    if (!toks.empty() && toks.front().front() != '%')
    {
      return true;
    }
  }
  return false;
}

Complex parse_value(const std::vector<std::string_view> &toks, std::size_t first,
                    Field field, std::size_t line)
{
  const std::size_t need = first + (field == Field::complex ? 2 : 1);
  if (toks.size() != need)
  {
    fail(line, "expected " + std::to_string(need) + " fields, got " +
                   std::to_string(toks.size()));
  }
  const double re = parse_real(toks[first], line);
  const double im = field == Field::complex ? parse_real(toks[first + 1], line) : 0.0;
  return {re, im};
}

std::string format_real(double x)
{
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), p);
}

}  // namespace

Matrix read(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line))
  {
    throw ParseError("empty input");
  }
  const Header h = parse_header(line);
  std::size_t number = 1;

  if (!next_data_line(in, line, number))
  {
    fail(number, "missing size line");
  }
  const auto size_toks = split(line);
  if (size_toks.size() != (h.coordinate ? 3u : 2u))
  {
    fail(number, "malformed size line");
  }
  const std::int64_t rows = parse_int(size_toks[0], number);
  const std::int64_t cols = parse_int(size_toks[1], number);
  if (rows <= 0 || cols <= 0)
  {
    fail(number, "dimensions must be positive");
  }
  if (rows > kMaxEntries / cols)
  {
    fail(number, "matrix of " + std::to_string(rows) + " x " + std::to_string(cols) +
                     " exceeds the size limit");
  }
  if (h.symmetry != Symmetry::general && rows != cols)
  {
    fail(number, "symmetric or hermitian matrix must be square");
  }

  Matrix m = Matrix::Zero(rows, cols);
  if (!h.coordinate)
  {
    for (std::int64_t j = 0; j < cols; j++)
    {
      for (std::int64_t i = 0; i < rows; i++)
      {
        if (!next_data_line(in, line, number))
        {
          fail(number, "array data ends early");
        }
        m(i, j) = parse_value(split(line), 0, h.field, number);
      }
    }
    if (next_data_line(in, line, number))
    {
      fail(number, "trailing data after array entries");
    }
    return m;
  }

  const std::int64_t nnz = parse_int(size_toks[2], number);
  if (nnz < 0 || nnz > rows * cols)
  {
    fail(number, "entry count out of range");
  }
  std::vector<bool> seen(static_cast<std::size_t>(rows * cols), false);
  for (std::int64_t e = 0; e < nnz; e++)
  {
    if (!next_data_line(in, line, number))
    {
      fail(number, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(e));
    }
    const auto toks = split(line);
    if (toks.size() < 2)
    {
      fail(number, "malformed entry");
    }
    const std::int64_t i = parse_int(toks[0], number) - 1;
    const std::int64_t j = parse_int(toks[1], number) - 1;
    if (i < 0 || i >= rows || j < 0 || j >= cols)
    {
      fail(number, "index (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                       ") out of bounds");
    }
    const Complex v = parse_value(toks, 2, h.field, number);
    if (h.symmetry != Symmetry::general && j > i)
    {
      fail(number, "entry above the diagonal in a symmetric or hermitian file");
    }
    if (h.symmetry == Symmetry::hermitian && i == j && v.imag() != 0.0)
    {
      fail(number, "hermitian diagonal entry has a nonzero imaginary part");
    }
    const auto slot = static_cast<std::size_t>(j * rows + i);
    if (seen[slot])
    {
      fail(number, "duplicate entry (" + std::to_string(i + 1) + ", " +
                       std::to_string(j + 1) + ")");
    }
    seen[slot] = true;
    m(i, j) = v;
    if (i != j)
    {
      if (h.symmetry == Symmetry::symmetric)
      {
        m(j, i) = v;
      }
      else if (h.symmetry == Symmetry::hermitian)
      {
        m(j, i) = std::conj(v);
      }
    }
  }
  if (next_data_line(in, line, number))
  {
    fail(number, "more entries than declared");
  }
  return m;
}

Matrix read_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  try
  {
    return read(in);
  }
  catch (const ParseError &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write(std::ostream &out, const Matrix &m)
{
  const bool complex = (m.array().imag() != 0.0).any();
  Index nnz = 0;
  for (Index j = 0; j < m.cols(); j++)
  {
    for (Index i = 0; i < m.rows(); i++)
    {
      nnz += m(i, j) != Complex(0.0, 0.0);
    }
  }
  out << "%%MatrixMarket matrix coordinate " << (complex ? "complex" : "real")
      << " general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < m.cols(); j++)
  {
    for (Index i = 0; i < m.rows(); i++)
    {
      const Complex v = m(i, j);
      if (v == Complex(0.0, 0.0))
      {
        continue;
      }
      out << i + 1 << ' ' << j + 1 << ' ' << format_real(v.real());
      if (complex)
      {
        out << ' ' << format_real(v.imag());
      }
      out << '\n';
    }
  }
}

void write_file(const std::filesystem::path &path, const Matrix &m)
{
  std::ofstream out(path);
  if (!out)
  {
    throw ParseError("cannot write '" + path.string() + "'");
  }
  write(out, m);
}

StartPair read_start_file(const std::filesystem::path &path)
{
  const Matrix m = read_file(path);
  if (m.cols() != 2)
  {
    throw ParseError(path.string() + ": start file must have two columns (r_{-1}, r_0)");
  }
  try
  {
    return StartPair(m.col(0), m.col(1));
  }
  catch (const std::invalid_argument &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_start_file(const std::filesystem::path &path, const StartPair &s)
{
  Matrix m(s.size(), 2);
  m.col(0) = s.r_minus1();
  m.col(1) = s.r_zero();
  write_file(path, m);
}

}  // namespace toar::mm
