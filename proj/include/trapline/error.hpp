#pragma once

#include <stdexcept>
#include <string>

namespace trapline {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, manifests, schemas, config files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " at line " + std::to_string(line) : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A record violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A detection, mask, or embedding provider failed.
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// The external encoder failed; what() carries its diagnostics.
class EncoderError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace trapline
