#pragma once

#include <stdexcept>
#include <string>

namespace vqrate {

/// The operation is not defined for this kind of measure (e.g. a CDF of a 2D measure).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The grid is not an element of F_K (duplicate, non-finite or unsorted points).
class InvalidQuantizer : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The hypotheses of a bound are not met for the given parameters.
class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed distribution spec, CSV file or experiment configuration.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vqrate
