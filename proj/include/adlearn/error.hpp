#pragma once

#include <stdexcept>
#include <string>

namespace adl {

enum class ErrorCode {
    InvalidArgument,  // rejected input (shape mismatch, bad config, ...)
    Io,               // file could not be opened/read/written
    Format,           // file exists but is not a valid/compatible format
    Numeric,          // non-finite values during computation
    Degenerate,       // clustering impossible (too few distinct vectors)
    Internal          // broken invariant inside the library
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace adl
