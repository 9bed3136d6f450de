#pragma once

#include <stdexcept>
#include <string>

namespace sgch {

/// Malformed data: non-finite samples, length mismatches.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside its admissible range.  The message names the
/// violated inequality.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sgch
