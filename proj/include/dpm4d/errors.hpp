#pragma once

#include <stdexcept>
#include <string>

namespace dpm4d {

// Base of every error thrown by the library. The CLI maps the subclasses
// onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

// Broken internal contract, e.g. a DP node missing one of its child messages.
class ContractError : public Error {
public:
    using Error::Error;
};

class ReachabilityError : public Error {
public:
    ReachabilityError(double distance, double min_reach, double max_reach);

    double distance() const { return distance_; }
    double min_reach() const { return min_reach_; }
    double max_reach() const { return max_reach_; }

private:
    double distance_;
    double min_reach_;
    double max_reach_;
};

// Wrist singularity: sin(q5) == 0 so q4 and q6 are not separable. q5 itself
// is still well defined and is carried by the error.
class DegenerateOrientationError : public Error {
public:
    explicit DegenerateOrientationError(double q5);

    double q5() const { return q5_; }

private:
    double q5_;
};

}  // namespace dpm4d
