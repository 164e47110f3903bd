// Copyright 2026 The cgvo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cgvo {

// Base of every error raised by the library. Callers that only need a
// coarse category (the CLI maps these onto exit codes) switch on kind().
class Error : public std::runtime_error {
 public:
  enum class Kind { kShape, kContract, kParse, kDegenerate, kCheckpoint, kData, kConfig, kIo, kGeneration };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(Kind::kShape, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(Kind::kContract, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(Kind::kParse, "line " + std::to_string(line) + ": " + what), detail_(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

class DegenerateOrientationError : public Error {
 public:
  explicit DegenerateOrientationError(const std::string& what) : Error(Kind::kDegenerate, what) {}
};

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& what) : Error(Kind::kCheckpoint, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::kData, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::kIo, what) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& what) : Error(Kind::kGeneration, what) {}
};

}  // namespace cgvo
