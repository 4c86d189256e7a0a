#pragma once

#include <stdexcept>
#include <string>

namespace dynamo {

// Root of the library's error taxonomy. The three categories map onto the
// CLI exit codes: ConfigError -> 2, DataError -> 3, NumericalError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

// timeseries_io
struct MissingTimestampColumn : DataError {
    using DataError::DataError;
};
struct NonMonotoneTimestamps : DataError {
    NonMonotoneTimestamps(const std::string& msg, std::size_t row)
        : DataError(msg), row_index(row) {}
    std::size_t row_index;  // 1-based data row of the first offending sample
};
struct EmptyInput : DataError {
    using DataError::DataError;
};
struct GapTooLarge : DataError {
    using DataError::DataError;
};
struct LengthMismatch : DataError {
    using DataError::DataError;
};
struct UnknownChannel : DataError {
    using DataError::DataError;
};

// embedding
struct SeriesTooShort : DataError {
    SeriesTooShort(const std::string& msg, std::size_t min_len)
        : DataError(msg), minimum_length(min_len) {}
    std::size_t minimum_length;
};
struct NumericalFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct RankTooLarge : DataError {
    using DataError::DataError;
};

// havok
struct TooFewPoints : DataError {
    using DataError::DataError;
};
struct SingularRegression : NumericalError {
    using NumericalError::NumericalError;
};
struct NonFiniteState : NumericalError {
    using NumericalError::NumericalError;
};

// anomaly
struct WindowTooLarge : ConfigError {
    using ConfigError::ConfigError;
};

// sindy
struct EmptyLibrary : ConfigError {
    using ConfigError::ConfigError;
};
struct NoActiveTerms : NumericalError {
    NoActiveTerms(const std::string& msg, std::size_t state)
        : NumericalError(msg), state_index(state) {}
    std::size_t state_index;
};

// metrics
struct DegenerateLabels : DataError {
    using DataError::DataError;
};

// synth
struct OverlappingEvents : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace dynamo
