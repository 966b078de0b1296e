#pragma once

#include <stdexcept>
#include <string>

namespace mea {

// Bad argument to a library operation (precondition violation).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rejection sampler ran out of its attempt budget.
class SamplingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No drop could be conditioned into the requested gamma bin.
class BinInfeasible : public std::runtime_error {
 public:
  BinInfeasible(const std::string& what, double bin_db)
      : std::runtime_error(what), bin_db_(bin_db) {}

  double bin_db() const noexcept { return bin_db_; }

 private:
  double bin_db_;
};

// Configuration error; key() names the offending key when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mea
