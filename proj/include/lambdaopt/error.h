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

#ifndef LAMBDAOPT_ERROR_H_
#define LAMBDAOPT_ERROR_H_

#include <stdexcept>
#include <string>

namespace lambdaopt {

// Every error carries a short machine-parsable code; the CLI prints
// "error[<code>]: <message>" on a single line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("parse", message + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string& message)
      : Error("empty_corpus", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class IncompatibleError : public Error {
 public:
  explicit IncompatibleError(const std::string& message)
      : Error("incompatible", message) {}
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& message)
      : Error("sampling", message) {}
};

// Raised when a gradient, parameter or loss stops being finite.
class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& message)
      : Error("non_finite", message) {}
};

}  // namespace lambdaopt

#endif  // LAMBDAOPT_ERROR_H_
