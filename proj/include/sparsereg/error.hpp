#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sparsereg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A well-formed request the model could not satisfy. The CLI maps these to
// exit code 1.
class ModelError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public ModelError {
 public:
  ConvergenceError(const std::string& what, double lambda = 0.0)
      : ModelError(what), lambda_(lambda) {}
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

class SeparationError : public ModelError {
 public:
  using ModelError::ModelError;
};

class RankDeficientError : public ModelError {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : ModelError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

}  // namespace sparsereg
