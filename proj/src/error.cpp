// Copyright 2026 The BFLC Simulator Authors
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

#include "bflc/error.hpp"

namespace bflc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::OutOfOrder: return "out-of-order";
        case ErrorCode::RoundFull: return "round-full";
        case ErrorCode::RoundIncomplete: return "round-incomplete";
        case ErrorCode::PrunedUnavailable: return "pruned-unavailable";
        case ErrorCode::Forbidden: return "forbidden";
        case ErrorCode::DuplicateSubmission: return "duplicate-submission";
        case ErrorCode::ElectionFailure: return "election-failure";
        case ErrorCode::AdmissionDenied: return "admission-denied";
        case ErrorCode::PaymentRequired: return "payment-required";
        case ErrorCode::NotFound: return "not-found";
        case ErrorCode::InsufficientFunds: return "insufficient-funds";
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::ExperimentFailure: return "experiment-failure";
    }
    return "unknown";
}

}  // namespace bflc
