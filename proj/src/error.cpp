// Copyright 2026 The EBEN Toolkit Authors
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

#include "eben/error.hpp"

namespace eben {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotMono: return "NotMono";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kAllZeroSignal: return "AllZeroSignal";
    case ErrorCode::kEmptyBuffer: return "EmptyBuffer";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kBankMismatch: return "BankMismatch";
    case ErrorCode::kCountOutOfRange: return "CountOutOfRange";
    case ErrorCode::kBufferTooShort: return "BufferTooShort";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kSegmentOutOfRange: return "SegmentOutOfRange";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooFewSegments: return "TooFewSegments";
    case ErrorCode::kInvalidQ: return "InvalidQ";
    case ErrorCode::kKernelStrideMismatch: return "KernelStrideMismatch";
    case ErrorCode::kBandCountOrder: return "BandCountOrder";
    case ErrorCode::kWeightShapeMismatch: return "WeightShapeMismatch";
    case ErrorCode::kLengthOverflow: return "LengthOverflow";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kShapeMismatchOnLoad: return "ShapeMismatchOnLoad";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kZeroReference: return "ZeroReference";
  }
  return "UnknownError";
}

}  // namespace eben
