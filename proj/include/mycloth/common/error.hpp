#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace mycloth {

// Base of every error the library raises. Subclasses map one-to-one onto the
// failure kinds callers are expected to distinguish (the service maps them to
// HTTP status codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::map<std::string, std::string> fields = {})
      : Error(message), fields_(std::move(fields)) {}

  const std::map<std::string, std::string>& fields() const { return fields_; }

 private:
  std::map<std::string, std::string> fields_;
};

class BackendUnavailableError : public Error {
 public:
  BackendUnavailableError(const std::string& message, std::string cause)
      : Error(message + ": " + cause), cause_(std::move(cause)) {}

  const std::string& cause() const { return cause_; }

 private:
  std::string cause_;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line) : Error(message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class RevisionConflictError : public Error {
 public:
  RevisionConflictError(const std::string& message, long long current_revision)
      : Error(message), current_revision_(current_revision) {}
  long long current_revision() const { return current_revision_; }

 private:
  long long current_revision_;
};

// Raised when a persisted record was found corrupt and moved aside.
class GoneError : public Error {
 public:
  using Error::Error;
};

}  // namespace mycloth
