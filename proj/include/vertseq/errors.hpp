#pragma once

#include <stdexcept>
#include <string>

namespace vertseq {

// Bad input data: malformed documents, out-of-range scores, unsolvable
// subjects. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// No labelling satisfies the constraints (more than 26 vertebrae).
class NoValidPathError : public DataError {
 public:
  using DataError::DataError;
};

// A caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InvalidPathError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace vertseq
