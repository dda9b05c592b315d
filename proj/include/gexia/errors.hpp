#pragma once

#include <stdexcept>
#include <string>

namespace gexia {

// Error taxonomy mirrors the CLI exit codes: usage -> 2, data/format -> 3,
// numeric -> 4, remote service -> 5.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateInputError : NumericError {
    explicit DegenerateInputError(const std::string& msg) : NumericError(msg) {}
};

struct RemoteServiceError : std::runtime_error {
    explicit RemoteServiceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gexia
