#pragma once

#include <stdexcept>
#include <string>

namespace mobo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class FitFailure : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based and 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GenerationStarvation : public Error {
 public:
  GenerationStarvation(const std::string& what, double acceptance_rate)
      : Error(what), acceptance_rate_(acceptance_rate) {}
  double acceptance_rate() const noexcept { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

/// Oracle failure. Carries whatever the oracle printed so it can be surfaced.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::string raw_output = {})
      : Error(what), raw_output_(std::move(raw_output)) {}
  const std::string& raw_output() const noexcept { return raw_output_; }

 private:
  std::string raw_output_;
};

}  // namespace mobo
