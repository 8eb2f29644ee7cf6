#pragma once

#include <stdexcept>
#include <string>

namespace hrb {

/// Base class for failures of the numerical pipeline (as opposed to invalid input,
/// which is reported with std::invalid_argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Newton failed at time index \c step (1-based, step 1 is the consistent initial solve).
class NewtonDiverged : public NumericalError {
 public:
  NewtonDiverged(int step, double residual, const std::string& what)
      : NumericalError(what), step_(step), residual_(residual) {}
  int step() const noexcept { return step_; }
  double residual() const noexcept { return residual_; }

 private:
  int step_;
  double residual_;
};

class PositivityLost : public NumericalError {
 public:
  PositivityLost(int step, double min_y, const std::string& what)
      : NumericalError(what), step_(step), min_y_(min_y) {}
  int step() const noexcept { return step_; }
  double min_y() const noexcept { return min_y_; }

 private:
  int step_;
  double min_y_;
};

class SaturationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hrb
