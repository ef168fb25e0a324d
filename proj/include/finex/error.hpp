#pragma once

#include <stdexcept>
#include <string>

namespace finex {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class EmptyDocumentError : public IngestionError {
 public:
  using IngestionError::IngestionError;
};

/// Bad or missing configuration; raised at load time, never mid-run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A backend answered, but the answer violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Timeout, refused connection or 5xx. Callers may retry.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, double retry_after_s = 0.0)
      : Error(what), retry_after_s_(retry_after_s) {}
  double retry_after_s() const noexcept { return retry_after_s_; }

 private:
  double retry_after_s_;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Pipeline bug (e.g. two results for one field).
class InternalError : public Error {
 public:
  using Error::Error;
};

/// First `n` bytes of a payload, for error messages.
std::string excerpt(const std::string& payload, std::size_t n = 200);

}  // namespace finex
