#pragma once

#include <stdexcept>
#include <string>

namespace vsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or preconditions (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure at run time (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class BlowupError : public NumericalError {
 public:
  BlowupError(long step, const std::string& what)
      : NumericalError("blowup at step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(double worst_residual, const std::string& what)
      : NumericalError(what + " (worst residual " + std::to_string(worst_residual) + ")"),
        worst_residual_(worst_residual) {}
  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

/// Malformed or unreadable persisted files.
class FormatError : public Error {
 public:
  enum class Code { kIo, kBadMagic, kVersionMismatch, kTruncated, kCorrupt };

  FormatError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

}  // namespace vsa
