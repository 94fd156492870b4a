#pragma once

#include <stdexcept>
#include <string>

namespace mdsl {

// Base for all library errors. CLI maps DomainError -> exit 1 and
// ConfigError/IoError/FormatError -> exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid values or violated operation contracts.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A dataset is too small for the requested operation.
class SizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A required class is missing from (or underrepresented in) a dataset.
class CoverageError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Least-squares design matrix is rank-deficient.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A local update produced non-finite parameters.
class DivergenceError : public DomainError {
 public:
  DivergenceError(int round, int worker)
      : DomainError("non-finite parameters in local update at round " +
                    std::to_string(round) + ", worker " +
                    std::to_string(worker)),
        round_(round),
        worker_(worker) {}

  int round() const { return round_; }
  int worker() const { return worker_; }

 private:
  int round_;
  int worker_;
};

// Malformed input file (IDX magic, truncation, schema mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration; message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdsl
