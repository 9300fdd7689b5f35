#pragma once

#include <stdexcept>
#include <string>

namespace scaffolding {

// Base for every failure the engine reports through exceptions. Validation
// findings are not exceptions; they travel as Diagnostic values.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset ingest.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class InconsistentColumns : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class DatasetTooLarge : public Error {
 public:
  using Error::Error;
};

class UnknownFieldError : public Error {
 public:
  using Error::Error;
};

class FieldNotContinuous : public Error {
 public:
  using Error::Error;
};

// Scaffold validation.
class NotABinPredicate : public Error {
 public:
  NotABinPredicate(int group_index, const std::string& what)
      : Error(what), group_index_(group_index) {}
  int group_index() const { return group_index_; }

 private:
  int group_index_;
};

class InvalidScaffold : public Error {
 public:
  using Error::Error;
};

// LLM gateway.
class TransportError : public Error {
 public:
  using Error::Error;
};

class AuthError : public Error {
 public:
  using Error::Error;
};

class SchemaViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace scaffolding
