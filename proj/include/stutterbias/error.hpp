#pragma once

#include <stdexcept>
#include <string>

namespace stutterbias {

// Base for every error raised by the library. Messages are meant to be shown
// to a user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stutterbias
