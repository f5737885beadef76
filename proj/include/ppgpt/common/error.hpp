#pragma once

#include <stdexcept>
#include <string>

namespace ppgpt {

/// Base class for operational failures (I/O, external processes, providers).
/// Source-level problems are reported as Diagnostics instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  enum class Kind { DuplicateId, DimensionMismatch, CorruptFile, VersionMismatch, InvalidEntry, Empty };
  StoreError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ppgpt
