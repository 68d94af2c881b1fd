#pragma once

#include <stdexcept>
#include <string>

namespace sinkmatch {

enum class errc {
  invalid_input,
  invalid_global,
  dimension_mismatch,
  numerical_underflow,
  unsupported_size,
  format_error,
  invalid_ground_truth,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sinkmatch
