#include "core/error.hpp"

namespace ddnet {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::InvalidInput: return "invalid input";
        case ErrorCode::Shape: return "shape mismatch";
        case ErrorCode::Config: return "invalid config";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::Parse: return "parse error";
        case ErrorCode::Corrupt: return "corrupt file";
        case ErrorCode::Version: return "version mismatch";
        case ErrorCode::Diverged: return "training diverged";
        case ErrorCode::NotFound: return "not found";
        case ErrorCode::DegenerateBatch: return "degenerate batch";
    }
    return "unknown error";
}

}  // namespace ddnet
