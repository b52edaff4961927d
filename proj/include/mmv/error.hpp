#pragma once

#include <stdexcept>
#include <string>

namespace mmv {

// Base class of every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Rank-deficient or otherwise unusable input (e.g. row_orthonormalize on a
// matrix without full row rank).
class DegenerateInput : public Error {
public:
  using Error::Error;
};

// The feasible set {a : ||Phi a - B||_F <= eps} is empty.
class InfeasibleProblem : public Error {
public:
  using Error::Error;
};

// Brute-force routines refuse inputs whose cost is exponential in size.
class SizeLimit : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace mmv
