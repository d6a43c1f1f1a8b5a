#pragma once

#include <stdexcept>
#include <string>

namespace clustergraph {

/// Classifies failures so the command-line front end can map them to exit codes.
enum class ErrorKind {
  input,     ///< malformed or inconsistent data (exit code 1)
  config,    ///< bad parameters or configuration (exit code 2)
  internal,  ///< an invariant the library relies on was violated (exit code 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return Error(ErrorKind::input, what); }
inline Error config_error(const std::string& what) { return Error(ErrorKind::config, what); }
inline Error internal_error(const std::string& what) { return Error(ErrorKind::internal, what); }

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input:
      return 1;
    case ErrorKind::config:
      return 2;
    case ErrorKind::internal:
      return 3;
  }
  return 3;
}

}  // namespace clustergraph
