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

#ifndef LAMBDAOPT_SRC_BINARY_IO_H_
#define LAMBDAOPT_SRC_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "lambdaopt/error.h"
#include "lambdaopt/matrix.h"

// Native-endian raw encoding; files are only read back on the same kind of
// machine that wrote them.
namespace lambdaopt::binary_io {

template <class T>
void Write(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T Read(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated binary stream");
  return value;
}

inline void WriteDoubles(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

inline void ReadDoubles(std::istream& in, std::span<double> values) {
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw IoError("truncated binary stream");
}

inline void WriteMatrix(std::ostream& out, const Matrix& m) {
  Write<std::uint64_t>(out, m.rows());
  Write<std::uint64_t>(out, m.cols());
  WriteDoubles(out, m.values());
}

inline Matrix ReadMatrix(std::istream& in) {
  const auto rows = Read<std::uint64_t>(in);
  const auto cols = Read<std::uint64_t>(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
    throw IoError("implausible matrix shape in binary stream");
  }
  Matrix m(rows, cols);
  ReadDoubles(in, m.values());
  return m;
}

inline void WriteString(std::ostream& out, std::string_view s) {
  Write<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream& in) {
  const auto n = Read<std::uint32_t>(in);
  if (n > 4096) throw IoError("implausible string length in binary stream");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("truncated binary stream");
  return s;
}

class Fnv1a {
 public:
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      hash_ ^= p[k];
      hash_ *= 0x100000001B3ULL;
    }
  }
  template <class T>
  void Value(const T& v) {
    Bytes(&v, sizeof(T));
  }
  void Doubles(std::span<const double> v) {
    Bytes(v.data(), v.size() * sizeof(double));
  }
  void String(std::string_view s) { Bytes(s.data(), s.size()); }
  std::uint64_t hash() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace lambdaopt::binary_io

#endif  // LAMBDAOPT_SRC_BINARY_IO_H_
