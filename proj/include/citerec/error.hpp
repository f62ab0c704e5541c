#pragma once

#include <stdexcept>
#include <string>

namespace citerec {

// Base exception for all library failures. Callers that only care about
// "something in the pipeline went wrong" catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file or record did not match its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A precondition on arguments was violated (bad ratios, dimension mismatch...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace citerec
