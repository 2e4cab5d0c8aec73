#ifndef BCLEARER_ERRORS_HPP
#define BCLEARER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bclearer {

enum class ErrorCode {
    EncodingError,
    DanglingReference,
    SubtypeCycle,
    EmptyEndpoint,
    AmbiguousAlias,
    IoFailure,
    ZeroChunkSize,
    MissingChunk,
    RaggedRow,
    NonBijectiveRecoding,
    OverloadedMatch,
    ConflictingAttributes,
    AlreadySeeded,
    MissingMerge,
    NonDecimalAggregate,
    QueryMismatch,
    UnknownRepresentation,
    CategoryClash,
    SchemaViolation,
    StageOrderViolation,
    UnknownBUnit,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::EncodingError: return "EncodingError";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::SubtypeCycle: return "SubtypeCycle";
        case ErrorCode::EmptyEndpoint: return "EmptyEndpoint";
        case ErrorCode::AmbiguousAlias: return "AmbiguousAlias";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::ZeroChunkSize: return "ZeroChunkSize";
        case ErrorCode::MissingChunk: return "MissingChunk";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::NonBijectiveRecoding: return "NonBijectiveRecoding";
        case ErrorCode::OverloadedMatch: return "OverloadedMatch";
        case ErrorCode::ConflictingAttributes: return "ConflictingAttributes";
        case ErrorCode::AlreadySeeded: return "AlreadySeeded";
        case ErrorCode::MissingMerge: return "MissingMerge";
        case ErrorCode::NonDecimalAggregate: return "NonDecimalAggregate";
        case ErrorCode::QueryMismatch: return "QueryMismatch";
        case ErrorCode::UnknownRepresentation: return "UnknownRepresentation";
        case ErrorCode::CategoryClash: return "CategoryClash";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::StageOrderViolation: return "StageOrderViolation";
        case ErrorCode::UnknownBUnit: return "UnknownBUnit";
    }
    return "UnknownError";
}

// Single exception type for the whole engine; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace bclearer

#endif
