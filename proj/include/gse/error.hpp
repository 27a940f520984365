#pragma once

#include <stdexcept>
#include <string>

namespace gse {

// Base of every error the library throws. The CLI maps the three families
// below onto process exit codes (config=2, data=3, solver=4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its mathematical domain (nonpositive Weibull scale, negative age, ...).
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

// Malformed or out-of-contract input series, tables, or files.
class InputError : public DataError {
 public:
  using DataError::DataError;
};

// Supply/use tables that contradict themselves (e.g. use without output).
class InconsistencyError : public DataError {
 public:
  using DataError::DataError;
};

// Technical coefficient matrix with spectral radius >= 1.
class NonProductiveError : public DataError {
 public:
  NonProductiveError(const std::string& what, double spectral_radius)
      : DataError(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class ConcordanceError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace gse
