/*
 * Copyright (c) 2026, The shapesig Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapesig {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (non-finite point, bad box, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operation received a cloud in the wrong coordinate frame.
class FrameError : public Error {
 public:
  using Error::Error;
};

/// A view had no points to build a hull from.
class NoShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate sample whose class has no prototype.
class UnresolvableError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `offset` is a 1-based line for text formats and a
/// byte offset for binary ones.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : ValidationError(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Structured record is missing a field or carries an invalid value.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Filesystem or stream failure. `written` counts the rows that made it out
/// before the failure, when that is meaningful.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what, std::size_t written = 0)
      : Error(what), written_(written) {}
  std::size_t written() const noexcept { return written_; }

 private:
  std::size_t written_;
};

}  // namespace shapesig
