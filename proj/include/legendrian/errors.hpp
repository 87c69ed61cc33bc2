#pragma once

#include <stdexcept>
#include <string>

namespace legendrian {

// Base of every error raised by the library. Domain and range violations
// use the standard std::domain_error / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// phi1 and phi2 (numerically) share a zero.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Principal-branch guard of the inverse Darboux map.
class BranchError : public Error {
 public:
  BranchError(const std::string& what, double offending_value)
      : Error(what), offending_value_(offending_value) {}
  double offending_value() const { return offending_value_; }

 private:
  double offending_value_;
};

// H^3 / de Sitter model checks failed on a front vertex.
class ModelViolationError : public Error {
 public:
  using Error::Error;
};

// A matrix is not in the image of the Darboux map.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace legendrian
