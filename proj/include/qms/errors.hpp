#pragma once

#include <stdexcept>
#include <string>

namespace qms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// standard_rep
struct NonFaithfulState : Error { using Error::Error; };
struct NonCommuting : Error { using Error::Error; };
struct NonStationary : Error { using Error::Error; };
struct NonFaithfulReference : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// transfer
struct NoFixedPoint : Error { using Error::Error; };
struct ClusterNotIsolated : Error { using Error::Error; };
struct NotAProbability : Error { using Error::Error; };
struct NonSimpleEigenvalue : Error { using Error::Error; };
struct ZeroOverlap : Error { using Error::Error; };

// perturbation
struct ConditionAViolated : Error { using Error::Error; };

// ldp
struct NonUniqueLeadingEigenvalue : Error { using Error::Error; };
struct EmptyExposedSet : Error { using Error::Error; };

// oracle
struct TooManyProbes : Error { using Error::Error; };
struct ZeroProbabilityBranch : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

} // namespace qms
