#pragma once

#include <stdexcept>
#include <string>

namespace kinetic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSymmetric : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct MissingBounds : Error { using Error::Error; };
struct IdentityMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ParamViolation : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct StabilityViolation : Error { using Error::Error; };
struct MassLoss : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace kinetic
