#pragma once

#include <stdexcept>
#include <string>

namespace dpmf {

/// Broad failure classes; the CLI prints the category name before the message
/// and maps each to its own exit status.
enum class ErrorCategory {
  Domain,
  PositiveDefiniteness,
  Parse,
  Validation,
  Index,
  Sampler,
  InvalidState,
  Config,
  Io,
};

const char* category_name(ErrorCategory c) noexcept;
int exit_status(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& w) : Error(ErrorCategory::Domain, w) {}
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& w)
      : Error(ErrorCategory::PositiveDefiniteness, w) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& w, long line)
      : Error(ErrorCategory::Parse, "line " + std::to_string(line) + ": " + w), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& w) : Error(ErrorCategory::Validation, w) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& w) : Error(ErrorCategory::Index, w) {}
};

class SamplerError : public Error {
 public:
  explicit SamplerError(const std::string& w) : Error(ErrorCategory::Sampler, w) {}
};

class InvalidStateError : public Error {
 public:
  explicit InvalidStateError(const std::string& w) : Error(ErrorCategory::InvalidState, w) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::Config, w) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& w) : Error(ErrorCategory::Io, w) {}
};

}  // namespace dpmf
