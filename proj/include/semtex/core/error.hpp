#pragma once

#include <stdexcept>
#include <string>

namespace semtex {

// Error taxonomy shared by every module. The CLI maps these onto exit codes
// (InvalidInput -> 1, IoError -> 2, NumericError -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace semtex
