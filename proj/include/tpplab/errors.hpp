#pragma once

#include <stdexcept>
#include <string>

namespace tpplab {

// Error taxonomy mirrors the CLI exit codes: config 2, numeric/certification 3, io 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct CertificationError : NumericError {
    explicit CertificationError(const std::string& what) : NumericError(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tpplab
