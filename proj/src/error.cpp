// Copyright 2026 The rsactl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rsactl/error.hpp"

namespace rsactl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::DegenerateEvidence: return "DegenerateEvidence";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
    }
    return "Unknown";
}

} // namespace rsactl
