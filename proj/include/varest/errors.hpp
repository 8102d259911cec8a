#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varest {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TooFewObservations : public Error {
public:
    TooFewObservations(std::size_t have, std::size_t need)
        : Error("too few observations: have " + std::to_string(have) + ", need at least " +
                std::to_string(need)) {}
};

class TooFewColumns : public Error {
public:
    TooFewColumns(std::size_t have, std::size_t need)
        : Error("too few columns: have " + std::to_string(have) + ", need at least " +
                std::to_string(need)) {}
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    IndexOutOfRange(std::size_t index, std::size_t bound)
        : Error("column index " + std::to_string(index) + " out of range [0, " +
                std::to_string(bound) + ")") {}
};

class NearSingularCovariance : public Error {
public:
    using Error::Error;
};

class InvalidModel : public Error {
public:
    using Error::Error;
};

class InvalidDataset : public Error {
public:
    using Error::Error;
};

class DegenerateZeroEstimator : public Error {
public:
    using Error::Error;
};

class UnsupportedDependenceStructure : public Error {
public:
    using Error::Error;
};

class InvalidScenario : public Error {
public:
    using Error::Error;
};

class InsufficientRecords : public Error {
public:
    using Error::Error;
};

class InitialEstimatorFailure : public Error {
public:
    InitialEstimatorFailure(std::size_t resample, const std::string& what)
        : Error("initial estimator failed on resample " + std::to_string(resample) + ": " + what),
          resample_index(resample) {}

    std::size_t resample_index;
};

/// Malformed input file; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line_no = 0)
        : Error(line_no ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no) {}

    std::size_t line;
};

}  // namespace varest
