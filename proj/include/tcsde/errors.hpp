#pragma once

#include <stdexcept>
#include <string>

namespace tcsde {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Request past the range of a path (explosion time of an inverse, composition overflow).
struct HorizonError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct UnsupportedError : std::logic_error {
    using std::logic_error::logic_error;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct AccuracyError : std::runtime_error {
    AccuracyError(const std::string& what, double bound) : std::runtime_error(what), achieved(bound) {}
    double achieved;
};

}  // namespace tcsde
