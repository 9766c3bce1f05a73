#pragma once

#include <stdexcept>
#include <string>

namespace ssafreq {

// Parameter/domain violations: bad physical parameters, malformed histograms,
// out-of-range settings. CLI maps these to exit code 2.
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

// The pipeline ran but could not produce a usable estimate (degenerate
// profile, empty Monte Carlo sample, ...). CLI maps these to exit code 3.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// File-format and filesystem problems. CLI maps these to exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ssafreq
