#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace extremo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition or type invariant.
class DomainError : public Error {
 public:
  using Error::Error;
};

class LagTooLarge : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The exceedance count in an extremogram denominator was zero.
class NoExceedances : public Error {
 public:
  explicit NoExceedances(std::int64_t count)
      : Error("no exceedances of the threshold (denominator count " +
              std::to_string(count) + ")"),
        count_(count) {}

  std::int64_t count() const noexcept { return count_; }

 private:
  std::int64_t count_;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Raised by the Brown-Resnick simulator when its Poisson point budget runs out.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::string message, std::int64_t points, double xi,
                 double stop_level)
      : Error(std::move(message)),
        points_(points),
        xi_(xi),
        stop_level_(stop_level) {}

  std::int64_t points() const noexcept { return points_; }
  double last_xi() const noexcept { return xi_; }
  double stop_level() const noexcept { return stop_level_; }

 private:
  std::int64_t points_;
  double xi_;
  double stop_level_;
};

/// Invalid experiment configuration; names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string reason)
      : Error(field + ": " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

}  // namespace extremo
