#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace islchan {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An input lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

class NotStochastic : public Error {
public:
  NotStochastic(std::size_t row, const std::string& why)
      : Error("transition matrix row " + std::to_string(row) + " is not a probability vector: " + why),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class Reducible : public Error {
public:
  using Error::Error;
};

class Absorbing : public Error {
public:
  explicit Absorbing(std::size_t state)
      : Error("state " + std::to_string(state) + " is absorbing (t_kk = 1)"), state_(state) {}

  std::size_t state() const noexcept { return state_; }

private:
  std::size_t state_;
};

class DegenerateDurations : public Error {
public:
  DegenerateDurations() : Error("sum of priority-weighted state durations is zero") {}
};

/// Bad or inconsistent run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace islchan
