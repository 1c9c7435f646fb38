#pragma once

#include <stdexcept>
#include <string>

namespace kfpca {

// Error taxonomy mirrored by the CLI exit codes:
//   config/usage -> 1, data -> 2, numerical -> 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& msg, long row) : DataError(msg), row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BandwidthError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace kfpca
