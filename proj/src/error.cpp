#include "tabrec/error.hpp"

namespace tabrec {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnknownFragment: return "UnknownFragment";
        case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
        case ErrorKind::LengthExceeded: return "LengthExceeded";
        case ErrorKind::UnknownEmptyForm: return "UnknownEmptyForm";
        case ErrorKind::MalformedSequence: return "MalformedSequence";
        case ErrorKind::MixedCoordinateForms: return "MixedCoordinateForms";
        case ErrorKind::DegenerateImageSize: return "DegenerateImageSize";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::AnchorMismatch: return "AnchorMismatch";
        case ErrorKind::StructureCellMismatch: return "StructureCellMismatch";
        case ErrorKind::FileFormatError: return "FileFormatError";
        case ErrorKind::RecordError: return "RecordError";
        case ErrorKind::UnknownToken: return "UnknownToken";
        case ErrorKind::BoxCountMismatch: return "BoxCountMismatch";
        case ErrorKind::DuplicateKey: return "DuplicateKey";
        case ErrorKind::InfeasibleParams: return "InfeasibleParams";
        case ErrorKind::MissingImageSize: return "MissingImageSize";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

} // namespace tabrec
