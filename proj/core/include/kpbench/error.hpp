#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kpbench {

// Base of every exception thrown by the library. The CLI maps the concrete
// type to an exit code (validation-like errors -> 1, I/O -> 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value lies outside the mathematical domain of an operation
// (severity 0, clean mAP <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The caller combined arguments in a way the operation does not accept.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid or unknown configuration value (dataset profile, override, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data failed schema or referential checks. Carries every issue found,
// not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  ValidationError(const std::string& context, std::vector<std::string> issues);

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpbench
