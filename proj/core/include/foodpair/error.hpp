#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace foodpair {

// Base class for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps it to a nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, streams, arguments).
class InputError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector dimensions that do not match the model contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during training (non-finite gradients and the like).
class NumericError : public Error {
 public:
  using Error::Error;
};

class UnknownIngredientError : public Error {
 public:
  UnknownIngredientError(std::string token, std::vector<std::string> suggestions);

  const std::string& token() const { return token_; }
  const std::vector<std::string>& suggestions() const { return suggestions_; }

 private:
  std::string token_;
  std::vector<std::string> suggestions_;
};

}  // namespace foodpair
