#pragma once

#include <stdexcept>
#include <string>

namespace convfem {

// Input/configuration problems: bad files, dangling references, invalid
// parameter combinations. CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime numerical failures: blow-up, singular systems, J <= 0 at a
// quadrature point. CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace convfem
