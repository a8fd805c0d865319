#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

// Invalid run configuration (bad parameter values, unknown keys, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation.
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cqed
