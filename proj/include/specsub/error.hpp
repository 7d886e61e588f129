#ifndef SPECSUB_ERROR_HPP
#define SPECSUB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace specsub {

/// Broad failure classes. The CLI prints the category name so scripts can
/// branch on it without parsing the message.
enum class ErrorCategory { io, parse, config, domain, numeric };

inline const char *category_name(ErrorCategory c) {
  switch (c) {
  case ErrorCategory::io:
    return "io";
  case ErrorCategory::parse:
    return "parse";
  case ErrorCategory::config:
    return "config";
  case ErrorCategory::domain:
    return "domain";
  case ErrorCategory::numeric:
    return "numeric";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string &what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string &what) {
  throw Error(category, what);
}

} // namespace specsub

#endif
