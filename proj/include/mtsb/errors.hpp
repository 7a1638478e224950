#pragma once

#include <stdexcept>
#include <string>

namespace mtsb {

// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MTSB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& msg) : Error(msg) {}     \
    };

MTSB_DEFINE_ERROR(DimensionError)       // shape mismatch or out-of-range index request
MTSB_DEFINE_ERROR(SymmetryError)        // matrix expected symmetric is not
MTSB_DEFINE_ERROR(OrthonormalityError)  // columns expected orthonormal are not
MTSB_DEFINE_ERROR(RankError)            // rank-deficient input where full rank is required
MTSB_DEFINE_ERROR(LagError)             // lag outside 1..T-1
MTSB_DEFINE_ERROR(OrderError)           // unsorted sequence, or factor count out of range
MTSB_DEFINE_ERROR(InsufficientDataError) // too few observations / ratios for the request
MTSB_DEFINE_ERROR(StabilityError)       // non-stationary coefficient (|phi| >= 1)
MTSB_DEFINE_ERROR(ConfigError)          // invalid configuration value or file
MTSB_DEFINE_ERROR(IngestError)          // malformed input data file

#undef MTSB_DEFINE_ERROR

}  // namespace mtsb
