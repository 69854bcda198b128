#ifndef URLTRACE_ERROR_HPP
#define URLTRACE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace urltrace {

enum class ErrorCode {
    EmptySession,
    NonImageFile,
    DecodeFailure,
    ImageTooSmall,
    TemplateLargerThanImage,
    DegenerateField,
    TextOverflow,
    BadManifest,
    BadInput,
    IoFailure,
};

/// Library-wide exception type. Every named failure carries a code so
/// callers can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::NonImageFile: return "NonImageFile";
    case ErrorCode::DecodeFailure: return "DecodeFailure";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::TemplateLargerThanImage: return "TemplateLargerThanImage";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::TextOverflow: return "TextOverflow";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

} // namespace urltrace

#endif // URLTRACE_ERROR_HPP
