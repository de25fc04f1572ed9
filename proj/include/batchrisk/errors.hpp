#pragma once

#include <stdexcept>
#include <string>

namespace batchrisk {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid call arguments (k > n, delta outside (0,1), draws < 2, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A value lies outside the active loss kind's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// An exact enumeration would exceed the evaluation cap.
class BudgetError : public Error {
public:
    using Error::Error;
};

// The requested operation is undefined for this loss kind.
class UnsupportedLossError : public Error {
public:
    using Error::Error;
};

// Exact integer arithmetic would exceed 128 bits.
class OverflowError : public Error {
public:
    using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace batchrisk
