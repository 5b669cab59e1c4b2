#pragma once

#include <stdexcept>
#include <string>

namespace ietidp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed breakpoints, degree/smoothness out of range,
/// inconsistent geometry files.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Topology or interface-matching violation of a multi-patch domain.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Geometry map with non-positive Jacobian determinant.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// Direct factorization detected a (numerically) singular matrix.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

#define IETIDP_REQUIRE(cond, ExceptionType, msg)                                                  \
    do {                                                                                          \
        if (!(cond)) throw ExceptionType(std::string(msg));                                       \
    } while (0)

}  // namespace ietidp
