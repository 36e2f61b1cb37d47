// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bangbang {

enum class ErrorKind {
  invalid_input,
  boundary_case,
  invalid_density,
  clustering_ambiguity,
  not_a_coboundary,
  domain,
  too_large_instance,
  parse,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::boundary_case: return "boundary-case";
    case ErrorKind::invalid_density: return "invalid-density";
    case ErrorKind::clustering_ambiguity: return "clustering-ambiguity";
    case ErrorKind::not_a_coboundary: return "not-a-coboundary";
    case ErrorKind::domain: return "domain";
    case ErrorKind::too_large_instance: return "too-large-instance";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace bangbang
