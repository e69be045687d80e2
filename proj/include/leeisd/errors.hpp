#pragma once

#include <stdexcept>
#include <string>

namespace leeisd {

/// Shapes or moduli of operands disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A parameter set that the requested algorithm cannot run with.
class InfeasibleParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Partial elimination could not put an identity on the leading columns.
class SingularTopLeft : public std::runtime_error {
public:
    SingularTopLeft() : std::runtime_error("leading block of the parity-check matrix is singular") {}
};

/// A list (base or merged) grew past its configured cap.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace leeisd
