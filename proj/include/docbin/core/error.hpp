#ifndef DOCBIN_CORE_ERROR_HPP
#define DOCBIN_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace docbin {

enum class ErrorCode {
    unreadable_file,
    unwritable_path,
    unsupported_format,
    corrupt_header,
    truncated_data,
    invalid_argument,
    dimension_mismatch,
    checksum_mismatch,
    missing_file,
    shape_mismatch,
    unmatched_files,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::unreadable_file: return "unreadable file";
        case ErrorCode::unwritable_path: return "unwritable path";
        case ErrorCode::unsupported_format: return "unsupported format";
        case ErrorCode::corrupt_header: return "corrupt header";
        case ErrorCode::truncated_data: return "truncated data";
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::checksum_mismatch: return "checksum mismatch";
        case ErrorCode::missing_file: return "missing file";
        case ErrorCode::shape_mismatch: return "shape mismatch";
        case ErrorCode::unmatched_files: return "unmatched files";
    }
    return "unknown error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True when inputs disagree with each other (sizes, pairings, checksums).
    bool is_mismatch() const noexcept {
        return code_ == ErrorCode::dimension_mismatch || code_ == ErrorCode::checksum_mismatch ||
               code_ == ErrorCode::shape_mismatch || code_ == ErrorCode::unmatched_files;
    }

    /// True for failures caused by the filesystem rather than by the data.
    bool is_io() const noexcept {
        return code_ == ErrorCode::unreadable_file || code_ == ErrorCode::unwritable_path ||
               code_ == ErrorCode::missing_file;
    }

private:
    ErrorCode code_;
};

}  // namespace docbin

#endif  // DOCBIN_CORE_ERROR_HPP
