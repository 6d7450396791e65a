/*
 * Copyright 2026 The lambdaopt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LAMBDAOPT_CSV_H_
#define LAMBDAOPT_CSV_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lambdaopt {

// Delimited record reader with RFC 4180 quoting (quoted fields may contain
// the delimiter, doubled quotes and line breaks).
class DelimitedReader {
 public:
  DelimitedReader(std::istream& in, char delimiter);

  // Reads the next record into `fields`. Returns false at end of input.
  bool Next(std::vector<std::string>& fields);

  // Physical line on which the last returned record started (1-based).
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t next_line_ = 1;
  std::size_t record_line_ = 0;
};

// Quotes `field` if it contains the delimiter, a quote or a line break.
std::string QuoteField(std::string_view field, char delimiter = ',');

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double value);

bool ParseInt64(std::string_view text, std::int64_t& out);
bool ParseDouble(std::string_view text, double& out);

}  // namespace lambdaopt

#endif  // LAMBDAOPT_CSV_H_
