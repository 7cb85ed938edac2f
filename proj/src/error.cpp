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

#include "swit/error.hpp"

namespace swit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kDatasetFormat: return "dataset_format";
    case ErrorCode::kDatasetVersion: return "dataset_version";
    case ErrorCode::kDatasetTruncated: return "dataset_truncated";
    case ErrorCode::kDatasetHeader: return "dataset_header";
    case ErrorCode::kCheckpoint: return "checkpoint";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace swit
