#pragma once

#include <stdexcept>
#include <string>

namespace tabrec {

enum class ErrorKind {
    UnknownFragment,
    SpanOutOfRange,
    LengthExceeded,
    UnknownEmptyForm,
    MalformedSequence,
    MixedCoordinateForms,
    DegenerateImageSize,
    ParseError,
    AnchorMismatch,
    StructureCellMismatch,
    FileFormatError,
    RecordError,
    UnknownToken,
    BoxCountMismatch,
    DuplicateKey,
    InfeasibleParams,
    MissingImageSize,
    ConfigError,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, long offset = -1)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          offset_(offset) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Byte offset for parse errors, line number for file errors; -1 if not applicable.
    long offset() const noexcept { return offset_; }

private:
    ErrorKind kind_;
    long offset_;
};

} // namespace tabrec
