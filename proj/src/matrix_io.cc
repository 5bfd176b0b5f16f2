// matrix_io.cc

// Copyright 2026  SpoofGuard authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "spoofguard/matrix_io.h"

#include <charconv>
#include <cmath>
#include <sstream>

namespace spoofguard {

std::string FormatReal(double value, int significant_digits) {
  Require(std::isfinite(value), ErrorCode::kNumerical,
          "refusing to serialize a non-finite value");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, significant_digits);
  return std::string(buf, res.ptr);
}

double ParseReal(std::string_view token) {
  double value = 0.0;
  const char *first = token.data();
  const char *last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
    Fail(ErrorCode::kParse, "cannot parse real '" + std::string(token) + "'");
  return value;
}

void WriteMatrixBlock(std::ostream &os, const RowMatrix &m,
                      int significant_digits) {
  os << "dim=" << m.cols() << " frames=" << m.rows() << '\n';
  std::string line;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ' ';
      line += FormatReal(m(r, c), significant_digits);
    }
    line += '\n';
    os << line;
  }
  if (!os) Fail(ErrorCode::kIo, "write failed");
}

RowMatrix ReadMatrixBlock(std::istream &is) {
  std::string header;
  if (!std::getline(is, header))
    Fail(ErrorCode::kParse, "missing matrix header");
  KeyValueLine kv(header, "");
  const long cols = kv.GetInt("dim");
  const long rows = kv.GetInt("frames");
  Require(cols >= 0 && rows >= 0, ErrorCode::kParse,
          "negative extent in '" + header + "'");
  RowMatrix m(rows, cols);
  std::string line;
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(is, line))
      Fail(ErrorCode::kParse, "matrix truncated at row " + std::to_string(r));
    std::istringstream ls(line);
    std::string token;
    long c = 0;
    while (ls >> token) {
      Require(c < cols, ErrorCode::kParse,
              "too many values in row " + std::to_string(r));
      m(r, c++) = ParseReal(token);
    }
    Require(c == cols, ErrorCode::kParse,
            "expected " + std::to_string(cols) + " values in row " +
                std::to_string(r) + ", got " + std::to_string(c));
  }
  return m;
}

void WriteVectorBlock(std::ostream &os, const Vector &v,
                      int significant_digits) {
  WriteMatrixBlock(os, v.transpose(), significant_digits);
}

Vector ReadVectorBlock(std::istream &is) {
  RowMatrix m = ReadMatrixBlock(is);
  Require(m.rows() == 1, ErrorCode::kParse, "expected a single-row block");
  return m.row(0).transpose();
}

void ExpectLine(std::istream &is, const std::string &expected) {
  std::string line;
  if (!std::getline(is, line) || line != expected)
    Fail(ErrorCode::kParse, "expected '" + expected + "', got '" + line + "'");
}

KeyValueLine::KeyValueLine(const std::string &line,
                           const std::string &leading_word)
    : line_(line) {
  std::istringstream ls(line);
  std::string token;
  if (!leading_word.empty()) {
    if (!(ls >> token) || token != leading_word)
      Fail(ErrorCode::kParse, "expected '" + leading_word + "' header, got '" +
                                  line + "'");
  }
  while (ls >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kParse, "malformed field '" + token + "' in '" + line + "'");
    fields_.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
}

std::string KeyValueLine::Get(const std::string &key) const {
  for (const auto &[k, v] : fields_)
    if (k == key) return v;
  Fail(ErrorCode::kParse, "missing '" + key + "' in '" + line_ + "'");
}

long KeyValueLine::GetInt(const std::string &key) const {
  const std::string v = Get(key);
  long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    Fail(ErrorCode::kParse, "'" + key + "' is not an integer in '" + line_ + "'");
  return out;
}

}  // namespace spoofguard
