#include "shelfscan/error.hpp"

namespace shelfscan {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::FrameMismatch: return "FrameMismatch";
    case ErrorKind::UnknownShelf: return "UnknownShelf";
    case ErrorKind::UnknownTrajectory: return "UnknownTrajectory";
    case ErrorKind::ReviewerCountMismatch: return "ReviewerCountMismatch";
    case ErrorKind::AxisMismatch: return "AxisMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::ShelfOutOfRange: return "ShelfOutOfRange";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InconsistentPopulation: return "InconsistentPopulation";
    case ErrorKind::InfeasibleScript: return "InfeasibleScript";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
    }
    return "Error";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, const std::string& element) {
    std::string out{to_string(kind)};
    if (!element.empty()) {
        out += "(" + element + ")";
    }
    out += ": " + message;
    return out;
}

} // namespace

Error::Error(ErrorKind kind, const std::string& message, std::string element)
    : std::runtime_error(compose(kind, message, element)), kind_(kind), element_(std::move(element)) {}

} // namespace shelfscan
