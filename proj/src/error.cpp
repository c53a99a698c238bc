#include "cgvd/error.hpp"

namespace cgvd {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnsupportedTemplate: return "UnsupportedTemplate";
    case ErrorCode::EmptyPhrase: return "EmptyPhrase";
    case ErrorCode::InvalidInstruction: return "InvalidInstruction";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NoTargetFound: return "NoTargetFound";
    case ErrorCode::EpisodeAlreadyInitialized: return "EpisodeAlreadyInitialized";
    case ErrorCode::Uninitialized: return "Uninitialized";
    case ErrorCode::PlacementInfeasible: return "PlacementInfeasible";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace cgvd
