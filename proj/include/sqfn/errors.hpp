#pragma once

#include <stdexcept>
#include <string>

namespace sqfn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid generator or algorithm parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input outside the mathematical domain of an operation (mass outside [0,1],
// unequal masses for the unrestricted distance, zero mass on a tree member).
class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SupportError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace sqfn
