#pragma once

#include <stdexcept>
#include <string>

namespace gbnn {

/// An index, symbol or count lies outside its permitted range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Two objects built for different network shapes were combined.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A serialized image or text record could not be decoded.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fixed-width accumulator would have been exceeded.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// A configuration value violates its contract (e.g. gamma == 0 for sum-of-max).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gbnn
