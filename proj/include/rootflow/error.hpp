#pragma once

#include <stdexcept>
#include <string>

namespace rootflow {

/// Failure categories raised by the numerical engines.
enum class ErrorKind {
  domain,           // argument outside the operation's domain
  pole,             // evaluation point coincides with a root
  non_convergence,  // iterative solver exceeded its iteration budget
  positivity_loss,  // density became non-positive
  degenerate,       // roots too close to resolve
  config,           // invalid experiment configuration
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::pole: return "pole";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::positivity_loss: return "positivity_loss";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::config: return "config";
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

}  // namespace rootflow
