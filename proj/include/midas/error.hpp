#pragma once

#include <stdexcept>
#include <string>

namespace midas {

// Root of every error the engine raises. The concrete type decides the CLI
// exit code and the HTTP status the gateway answers with.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something the contract rejects (empty text, bad range, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A document could not be decoded. `field()` is a JSON path such as
// `$.vaults.idea_vault[3].status`.
class DecodeError : public Error {
 public:
  DecodeError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A phase gate demanded human approval (or a survivor count) that was absent.
class GateError : public Error {
 public:
  using Error::Error;
};

// The operation is not valid in the session's current phase.
class PhaseError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool retryable, int attempts = 0, int status = 0)
      : Error(message), retryable_(retryable), attempts_(attempts), status_(status) {}

  bool retryable() const noexcept { return retryable_; }
  int attempts() const noexcept { return attempts_; }
  int status() const noexcept { return status_; }

 private:
  bool retryable_;
  int attempts_;
  int status_;
};

// The provider answered, but never with schema-valid output.
class StructuredOutputError : public Error {
 public:
  StructuredOutputError(const std::string& message, std::string raw_response)
      : Error(message), raw_response_(std::move(raw_response)) {}

  const std::string& raw_response() const noexcept { return raw_response_; }

 private:
  std::string raw_response_;
};

}  // namespace midas
