#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shelfscan {

enum class ErrorKind {
    Parse,
    Validation,
    InvalidWindow,
    TooShort,
    FrameMismatch,
    UnknownShelf,
    UnknownTrajectory,
    ReviewerCountMismatch,
    AxisMismatch,
    EmptyDataset,
    EmptyGrid,
    FractionOutOfRange,
    DegenerateSplit,
    ShelfOutOfRange,
    EmptyInput,
    LengthMismatch,
    InconsistentPopulation,
    InfeasibleScript,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for every library failure. `kind()` identifies the
/// failure class; `element()` names the offending element (shelf id, line
/// number, trajectory id) when one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string element = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& element() const noexcept { return element_; }

private:
    ErrorKind kind_;
    std::string element_;
};

} // namespace shelfscan
