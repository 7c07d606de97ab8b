/* Copyright 2026 The htd Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htd {

// Exit-code contract for the CLI: ValidationError subclasses map to exit
// code 2, RuntimeFailure subclasses to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

class MissingFile : public ValidationError {
 public:
  explicit MissingFile(const std::string& path)
      : ValidationError("missing file: " + path) {}
};

class MalformedRow : public ValidationError {
 public:
  MalformedRow(std::size_t row, const std::string& detail)
      : ValidationError("malformed row " + std::to_string(row) + ": " + detail),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class UnknownLabel : public ValidationError {
 public:
  explicit UnknownLabel(const std::string& value)
      : ValidationError("unknown category label: \"" + value + "\""),
        value_(value) {}
  const std::string& value() const { return value_; }

 private:
  std::string value_;
};

class EmptyClass : public ValidationError {
 public:
  explicit EmptyClass(const std::string& detail)
      : ValidationError("class too small to split: " + detail) {}
};

class DimensionMismatch : public ValidationError {
 public:
  explicit DimensionMismatch(const std::string& detail)
      : ValidationError("dimension mismatch: " + detail) {}
};

class ShapeMismatch : public ValidationError {
 public:
  explicit ShapeMismatch(const std::string& detail)
      : ValidationError("shape mismatch: " + detail) {}
};

class SpecMismatch : public ValidationError {
 public:
  explicit SpecMismatch(const std::string& detail)
      : ValidationError("model spec mismatch: " + detail) {}
};

class LengthMismatch : public ValidationError {
 public:
  explicit LengthMismatch(const std::string& detail)
      : ValidationError("length mismatch: " + detail) {}
};

class EmptyEvaluation : public ValidationError {
 public:
  EmptyEvaluation() : ValidationError("evaluation has zero total support") {}
  explicit EmptyEvaluation(const std::string& detail)
      : ValidationError("empty evaluation: " + detail) {}
};

class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& detail)
      : ValidationError("config error: " + detail) {}
};

class CheckpointUnavailable : public RuntimeFailure {
 public:
  explicit CheckpointUnavailable(const std::string& detail)
      : RuntimeFailure("checkpoint unavailable: " + detail) {}
};

class DivergenceDetected : public RuntimeFailure {
 public:
  explicit DivergenceDetected(const std::string& detail)
      : RuntimeFailure("training diverged: " + detail) {}
};

class IoFailure : public RuntimeFailure {
 public:
  explicit IoFailure(const std::string& detail)
      : RuntimeFailure("i/o failure: " + detail) {}
};

}  // namespace htd
