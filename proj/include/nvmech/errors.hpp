#pragma once

#include <stdexcept>
#include <string>

namespace nvmech {

// invalid physical or config parameter (CLI exit code 2)
class InvalidParameterError : public std::invalid_argument {
public:
    explicit InvalidParameterError(const std::string& what)
        : std::invalid_argument(what) {}
};

// numerical failure: singular matrix, integration breakdown, non-convergence
// (CLI exit code 3)
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nvmech
