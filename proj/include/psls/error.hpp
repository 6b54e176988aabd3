#pragma once

#include <stdexcept>
#include <string>

namespace psls {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A matrix lacks a structure the operation relies on (non-identity diagonal, etc).
class StructuralError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

// Prefix-consistency violated by a synthesized solution.
class SynthesisBugError : public Error {
public:
    using Error::Error;
};

class UnknownSignalError : public Error {
public:
    using Error::Error;
};

}  // namespace psls
