#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace antitonic {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidDensity : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

// Thrown when backtracking cannot decrease the objective. Keeps the objective
// values seen so far.
class StalledSolver : public NumericError {
public:
    StalledSolver(const std::string& what, std::vector<double> trace)
        : NumericError(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

// Malformed input files. line is 1-based, 0 when unknown.
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace antitonic
