#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkde {

//! Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! An argument lies outside the domain of the operation.
class DomainError : public Error
{
public:
  using Error::Error;
};

//! The data cannot support the requested statistic (zero spread, too few
//! observed values, ...).
class DegenerateDataError : public Error
{
public:
  using Error::Error;
};

//! All kernel weights of a local-mean smoother vanished.
class DegenerateWindowError : public DegenerateDataError
{
public:
  using DegenerateDataError::DegenerateDataError;
};

//! The curvature estimate is too close to zero for the local MSE-optimal
//! bandwidth. `suggested_bandwidth()` is the pilot bandwidth to use instead.
class InflectionFallbackError : public DegenerateDataError
{
public:
  InflectionFallbackError(const std::string& what, double suggested)
    : DegenerateDataError(what)
    , suggested_(suggested)
  {}

  double suggested_bandwidth() const noexcept { return suggested_; }

private:
  double suggested_;
};

//! Too few Monte Carlo replications for the requested summary.
class PrecisionError : public Error
{
public:
  using Error::Error;
};

//! Malformed user input. `line()` is 1-based, 0 when not tied to a line.
class InputError : public Error
{
public:
  InputError(const std::string& what, std::size_t line = 0)
    : Error(line ? what + " (line " + std::to_string(line) + ")" : what)
    , line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace rkde
