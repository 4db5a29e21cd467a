#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twincal {

// Estimation objective is flat: the listed parameters cannot be identified
// from the given data (e.g. pure-vacuum statistics).
class AmbiguousEstimateError : public std::runtime_error {
public:
    AmbiguousEstimateError(std::string what, std::vector<std::string> parameters)
        : std::runtime_error(std::move(what)), unidentifiable(std::move(parameters)) {}
    std::vector<std::string> unidentifiable;
};

// A solver failed to converge or a matrix required by the pipeline is singular.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; message names the file and the offending field.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, const std::string& detail)
        : std::runtime_error(file + ": " + detail), file(file), detail(detail) {}
    std::string file;
    std::string detail;
};

}  // namespace twincal
