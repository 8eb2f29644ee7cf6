#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace hrb {

using ScalarFunction = std::function<double(double)>;

/// (mu_1, mu_2, mu_3, mu_4): diffusion of y, coupling into y, diffusion of q, coupling into q.
using ParameterVector = Eigen::Vector4d;

std::string to_string(const ParameterVector& mu);
/// Strict lexicographic order, used for deterministic tie-breaking.
bool lexicographic_less(const ParameterVector& a, const ParameterVector& b);

struct ParameterBox {
  ParameterVector lower = ParameterVector::Constant(1.0);
  ParameterVector upper = ParameterVector::Constant(5.0);

  /// Throws std::invalid_argument unless 0 < lower <= upper.
  void validate() const;
  bool contains(const ParameterVector& mu, double slack = 0.0) const;
  ParameterVector project(const ParameterVector& mu) const;
  ParameterVector center() const { return 0.5 * (lower + upper); }
  /// Tensor grid with \p points_per_axis equispaced values per component, in lexicographic order.
  std::vector<ParameterVector> uniform_grid(int points_per_axis) const;
};

/// Boundary input u(t) entering the elliptic equation through the flux at x = L.
struct InputSignal {
  std::string description;
  ScalarFunction u;

  double operator()(double t) const { return u(t); }

  static InputSignal constant(double value);
  /// \p before on [0, t_switch), \p after on [t_switch, inf) (right-continuous).
  static InputSignal step(double before, double after, double t_switch);
  /// a cos(w1 t) + b sin(w2 t).
  static InputSignal sinusoid(double a, double w1, double b, double w2);
  /// Piecewise-linear interpolation of samples (t_i, u_i), constant beyond the ends.
  static InputSignal tabulated(std::vector<double> times, std::vector<double> values);
};

struct ProblemDefinition {
  double length = 1.0;
  double final_time = 1.0;
  ScalarFunction kappa1 = [](double) { return 1.0; };
  ScalarFunction kappa2 = [](double) { return 1.0; };
  ScalarFunction y_init = [](double) { return 5.0; };
  InputSignal input = InputSignal::constant(1.0);
  ParameterBox box;

  /// Checks scalar data and the parameter box; coefficient positivity is checked at
  /// quadrature points during assembly.
  void validate() const;
};

/// Equidistant grid t_k = k dt, k = 0..K-1, with trapezoidal weights.
class TimeGrid {
 public:
  TimeGrid(double final_time, int num_nodes);

  int size() const noexcept { return k_; }
  double dt() const noexcept { return dt_; }
  double final_time() const noexcept { return t_; }
  double time(int k) const noexcept { return k * dt_; }
  double weight(int k) const noexcept { return weights_[k]; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

 private:
  double t_;
  int k_;
  double dt_;
  Eigen::VectorXd weights_;
};

}  // namespace hrb
