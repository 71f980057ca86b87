#pragma once

#include <stdexcept>
#include <string>

namespace gradmix {

/// Raised for invalid inputs, malformed files and I/O failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gradmix
