#include "hrb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hrb {

std::string to_string(const ParameterVector& mu) {
  std::ostringstream os;
  os.precision(6);
  os << '(' << mu[0] << ',' << mu[1] << ',' << mu[2] << ',' << mu[3] << ')';
  return os.str();
}

bool lexicographic_less(const ParameterVector& a, const ParameterVector& b) {
  for (int i = 0; i < 4; ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return false;
}

void ParameterBox::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(lower[i] > 0.0)) throw std::invalid_argument("parameter box: lower bounds must be > 0");
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("parameter box: need lower <= upper");
  }
}

bool ParameterBox::contains(const ParameterVector& mu, double slack) const {
  return ((mu.array() >= lower.array() - slack) && (mu.array() <= upper.array() + slack)).all();
}

ParameterVector ParameterBox::project(const ParameterVector& mu) const {
  return mu.cwiseMax(lower).cwiseMin(upper);
}

std::vector<ParameterVector> ParameterBox::uniform_grid(int points_per_axis) const {
  if (points_per_axis < 1) throw std::invalid_argument("uniform_grid: need >= 1 point per axis");
  std::vector<double> axis[4];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < points_per_axis; ++j) {
      const double s = points_per_axis == 1 ? 0.5 : static_cast<double>(j) / (points_per_axis - 1);
      axis[i].push_back(lower[i] + s * (upper[i] - lower[i]));
    }
  }
  std::vector<ParameterVector> grid;
  grid.reserve(static_cast<std::size_t>(std::pow(points_per_axis, 4)));
  for (double a : axis[0])
    for (double b : axis[1])
      for (double c : axis[2])
        for (double d : axis[3]) grid.emplace_back(a, b, c, d);
  return grid;
}

InputSignal InputSignal::constant(double value) {
  std::ostringstream os;
  os << "constant(" << value << ')';
  return {os.str(), [value](double) { return value; }};
}

InputSignal InputSignal::step(double before, double after, double t_switch) {
  std::ostringstream os;
  os << "step(" << before << ',' << after << ',' << t_switch << ')';
  return {os.str(), [=](double t) { return t < t_switch ? before : after; }};
}

InputSignal InputSignal::sinusoid(double a, double w1, double b, double w2) {
  std::ostringstream os;
  os << "sinusoid(" << a << ',' << w1 << ',' << b << ',' << w2 << ')';
  return {os.str(), [=](double t) { return a * std::cos(w1 * t) + b * std::sin(w2 * t); }};
}

InputSignal InputSignal::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("tabulated input: need matching non-empty samples");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("tabulated input: sample times must be sorted");
  auto eval = [times = std::move(times), values = std::move(values)](double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double s = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - s) * values[j - 1] + s * values[j];
  };
  return {"tabulated", std::move(eval)};
}

void ProblemDefinition::validate() const {
  if (!(length > 0.0)) throw std::invalid_argument("problem: domain length must be positive");
  if (!(final_time > 0.0)) throw std::invalid_argument("problem: final time must be positive");
  if (!kappa1 || !kappa2 || !y_init || !input.u)
    throw std::invalid_argument("problem: coefficient, initial value and input must be set");
  box.validate();
}

TimeGrid::TimeGrid(double final_time, int num_nodes) : t_(final_time), k_(num_nodes) {
  if (num_nodes < 2) throw std::invalid_argument("time grid: need at least 2 nodes");
  if (!(final_time > 0.0)) throw std::invalid_argument("time grid: final time must be positive");
  dt_ = final_time / (num_nodes - 1);
  weights_ = Eigen::VectorXd::Constant(num_nodes, dt_);
  weights_[0] = weights_[num_nodes - 1] = 0.5 * dt_;
}

}  // namespace hrb
