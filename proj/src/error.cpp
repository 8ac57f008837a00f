#include "adlearn/error.hpp"

namespace adl {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Io: return "io";
        case ErrorCode::Format: return "format";
        case ErrorCode::Numeric: return "numeric";
        case ErrorCode::Degenerate: return "degenerate";
        case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

} // namespace adl
