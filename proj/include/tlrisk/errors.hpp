#pragma once

#include <stdexcept>
#include <string>

namespace tlrisk {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Matrix has the wrong dimensions for the requested operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Matrix content is unusable: non-finite entries, empty, or not decomposable.
class InvalidMatrix : public Error {
public:
    using Error::Error;
};

// An inverse (or inverse root) was requested of a matrix with no usable spectrum.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// Model has no usable signal direction (e.g. a null covariance).
class DegenerateModel : public Error {
public:
    using Error::Error;
};

// A documented validity condition of a formula does not hold for these inputs.
class PreconditionViolated : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class DivergedOptimization : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptySeries : public IoError {
public:
    using IoError::IoError;
};

} // namespace tlrisk
