// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SWiT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace swit {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorCode {
  kInvalidArgument = 2,
  kDegenerateGeometry = 3,
  kNumeric = 4,
  kShapeMismatch = 5,
  kDatasetFormat = 10,
  kDatasetVersion = 11,
  kDatasetTruncated = 12,
  kDatasetHeader = 13,
  kCheckpoint = 14,
  kConfig = 20,
  kIo = 21,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class DegenerateGeometry : public Error {
 public:
  explicit DegenerateGeometry(const std::string& what) : Error(ErrorCode::kDegenerateGeometry, what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorCode::kShapeMismatch, what) {}
};

/// Raised when an operation produces a non-finite value; the message names the op.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::kNumeric, what) {}
};

}  // namespace swit
