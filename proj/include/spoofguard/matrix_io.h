// spoofguard/matrix_io.h

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

// Decimal text matrix blocks:
//
//   dim=<cols> frames=<rows>
//   v v v ... (cols values)      <- one line per row
//
// Feature dumps use 9 significant digits. Model files use the same block
// layout at 17 digits so that parameters reload exactly.

#ifndef SPOOFGUARD_MATRIX_IO_H_
#define SPOOFGUARD_MATRIX_IO_H_

#include <istream>
#include <ostream>
#include <string>

#include "spoofguard/base.h"

namespace spoofguard {

inline constexpr int kFeatureDigits = 9;
inline constexpr int kModelDigits = 17;

std::string FormatReal(double value, int significant_digits);
double ParseReal(std::string_view token);

void WriteMatrixBlock(std::ostream &os, const RowMatrix &m,
                      int significant_digits);
RowMatrix ReadMatrixBlock(std::istream &is);

void WriteVectorBlock(std::ostream &os, const Vector &v, int significant_digits);
Vector ReadVectorBlock(std::istream &is);

/// Reads one line and checks it equals `expected` (used for block labels).
void ExpectLine(std::istream &is, const std::string &expected);

/// Reads `key=value` tokens from one line; throws kParse when a requested key
/// is absent.
class KeyValueLine {
 public:
  KeyValueLine(const std::string &line, const std::string &leading_word);
  std::string Get(const std::string &key) const;
  long GetInt(const std::string &key) const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
  std::string line_;
};

}  // namespace spoofguard

#endif  // SPOOFGUARD_MATRIX_IO_H_
