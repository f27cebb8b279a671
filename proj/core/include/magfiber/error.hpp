#pragma once

#include <stdexcept>
#include <string>

namespace magfiber {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class MemoryCapError : public Error {
public:
  using Error::Error;
};

/// Raised by model-level solves when the eigensolver returns converged=false.
class NotConvergedError : public Error {
public:
  using Error::Error;
};

class MinimizerAtEdgeError : public Error {
public:
  using Error::Error;
};

class TableRangeError : public Error {
public:
  using Error::Error;
};

class GammaZeroError : public Error {
public:
  using Error::Error;
};

class ScanRangeExhaustedError : public Error {
public:
  using Error::Error;
};

class InsufficientDecayError : public Error {
public:
  using Error::Error;
};

class OrderBreakdownError : public Error {
public:
  OrderBreakdownError(const std::string& what, double ratio) : Error(what), ratio_(ratio) {}
  double ratio() const noexcept { return ratio_; }

private:
  double ratio_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

class ValidationError : public Error {
public:
  ValidationError(const std::string& parameter, const std::string& what)
      : Error(what), parameter_(parameter) {}
  const std::string& parameter() const noexcept { return parameter_; }

private:
  std::string parameter_;
};

}  // namespace magfiber
