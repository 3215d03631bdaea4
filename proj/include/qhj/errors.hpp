#pragma once

#include <stdexcept>
#include <string>

namespace qhj {

// Base of every error thrown by the library. The subclasses split into three
// failure classes: bad input, a state that is not an eigenstate, and a solver
// breakdown. The CLI maps them onto exit codes 2, 3 and 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- bad input -------------------------------------------------------------

class ArgumentError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class UnboundStateError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

// --- not an eigenstate -----------------------------------------------------

class NotEigenvalueError : public Error {
public:
    NotEigenvalueError(const std::string& what, double defect)
        : Error(what), defect_(defect) {}

    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

// --- solver breakdown ------------------------------------------------------

class SolverError : public Error {
public:
    using Error::Error;
};

class StiffnessError : public SolverError {
public:
    StiffnessError(const std::string& what, double x) : SolverError(what), x_(x) {}

    double x() const noexcept { return x_; }

private:
    double x_;
};

class FamilyDegeneracyError : public SolverError {
public:
    using SolverError::SolverError;
};

class RefinementError : public SolverError {
public:
    using SolverError::SolverError;
};

class BadEstimateError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace qhj
