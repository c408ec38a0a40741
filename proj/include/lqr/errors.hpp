#pragma once
#include <stdexcept>
#include <string>

namespace lqr {

// numerical failure with enough context to reproduce it
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double omega = 0.0)
      : std::runtime_error(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

// ill-conditioned sideband system (near a parametric instability)
class InstabilityError : public NumericalError {
 public:
  InstabilityError(const std::string& what, double omega, int sideband, double rcond)
      : NumericalError(what, omega), sideband_(sideband), rcond_(rcond) {}
  int sideband() const { return sideband_; }
  double rcond() const { return rcond_; }

 private:
  int sideband_;
  double rcond_;
};

// operation requested on a configuration it is not defined for
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line + 1) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace lqr
