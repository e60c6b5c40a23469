#pragma once

#include <stdexcept>
#include <string>

namespace softsensor {

enum class ErrorKind {
  Validation,  // bad input, violated invariant
  Solver,      // numerical failure, limits without incumbent
  Io,          // file access or parse failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::Validation, what);
}
inline Error solver_error(const std::string& what) {
  return Error(ErrorKind::Solver, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::Io, what);
}

}  // namespace softsensor
