#pragma once

#include <stdexcept>
#include <string>

namespace gnm {

// Argument outside the mathematical domain of an operation (bad params,
// mismatched lengths, non-positive step sizes).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Inconsistent or unsatisfiable experiment configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gnm
