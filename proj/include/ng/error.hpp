#pragma once

#include <stdexcept>
#include <string>

namespace ng {

// Bad or missing input data (malformed files, invariant violations on load,
// out-of-range arguments). The CLI maps this to exit code 3.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Mixed artifact snapshots: digests or configs that should agree do not.
// The CLI maps this to exit code 4.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ng
