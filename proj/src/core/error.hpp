#pragma once

#include <stdexcept>
#include <string>

namespace ddnet {

enum class ErrorCode {
    InvalidArgument = 1,
    InvalidInput,
    Shape,
    Config,
    Io,
    Parse,
    Corrupt,
    Version,
    Diverged,
    NotFound,
    DegenerateBatch,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the engine carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace ddnet
