#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cohassist {

enum class ErrorKind {
    ShapeMismatch,
    NotFinite,
    NotHermitian,
    NoConvergence,
    TraceNotOne,
    NotPositive,
    ZeroDiagonalInconsistency,
    NotNormalized,
    InvalidEnsemble,
    NotIsometry,
    BasisNotOrthonormal,
    ConfigInvalid,
    ConstraintViolation,
    NotApplicable,
    OutsidePolytope,
    NoDecompositionFound,
    ParseError,
    InternalInconsistency,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cohassist
