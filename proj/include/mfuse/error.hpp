#pragma once

#include <stdexcept>
#include <string>

namespace mfuse {

/// Raised for every contract violation and I/O failure in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace mfuse
