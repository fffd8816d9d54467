// Copyright 2026 The qdec Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qdec {

enum class ErrorCode {
    NonHermitianInput,
    NegativeEigenvalue,
    NonSquare,
    NonpositiveRate,
    PulseShapeMismatch,
    GaussianTooWide,
    StepTooLarge,
    TraceDrift,
    StepSelectionFailed,
    RankDeficientRho,
    NonUnitaryGauge,
    NoTimeReversalGauge,
    DegenerateSteadyState,
    RankDeficientSteadyState,
    DimensionMismatch,
    ClickProbabilityOverflow,
    RecordLengthMismatch,
    GridTooNarrow,
    TooManyBins,
    ConfigInvalid,
    InvalidArgument,
};

inline const char *to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonHermitianInput: return "NonHermitianInput";
        case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::NonpositiveRate: return "NonpositiveRate";
        case ErrorCode::PulseShapeMismatch: return "PulseShapeMismatch";
        case ErrorCode::GaussianTooWide: return "GaussianTooWide";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::TraceDrift: return "TraceDrift";
        case ErrorCode::StepSelectionFailed: return "StepSelectionFailed";
        case ErrorCode::RankDeficientRho: return "RankDeficientRho";
        case ErrorCode::NonUnitaryGauge: return "NonUnitaryGauge";
        case ErrorCode::NoTimeReversalGauge: return "NoTimeReversalGauge";
        case ErrorCode::DegenerateSteadyState: return "DegenerateSteadyState";
        case ErrorCode::RankDeficientSteadyState: return "RankDeficientSteadyState";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ClickProbabilityOverflow: return "ClickProbabilityOverflow";
        case ErrorCode::RecordLengthMismatch: return "RecordLengthMismatch";
        case ErrorCode::GridTooNarrow: return "GridTooNarrow";
        case ErrorCode::TooManyBins: return "TooManyBins";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}
    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string &detail() const noexcept { return detail_; }

   private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

}  // namespace qdec
