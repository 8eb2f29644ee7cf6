#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hrb/fe.hpp"

namespace hrb {

QuadratureRule QuadratureRule::gauss(int num_points) {
  // Nodes/weights on [-1, 1], mapped to [0, 1] below.
  std::vector<double> x, w;
  switch (num_points) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("gauss quadrature: 1 to 5 points supported");
  }
  QuadratureRule rule;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

FeSpace::FeSpace(double length, int n_cells, int order)
    : length_(length), n_cells_(n_cells), order_(order) {
  if (order != 1 && order != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");
  if (n_cells < 2) throw std::invalid_argument("FeSpace: need at least 2 cells");
  if (!(length > 0.0)) throw std::invalid_argument("FeSpace: length must be positive");
  h_ = length / n_cells;
}

std::vector<double> FeSpace::nodes() const {
  std::vector<double> x(dim_v());
  for (int i = 0; i < dim_v(); ++i) x[i] = node(i);
  return x;
}

double FeSpace::shape(int local, double xi) const {
  if (order_ == 1) return local == 0 ? 1.0 - xi : xi;
  switch (local) {
    case 0:
      return 2.0 * (xi - 0.5) * (xi - 1.0);
    case 1:
      return 4.0 * xi * (1.0 - xi);
    default:
      return 2.0 * xi * (xi - 0.5);
  }
}

double FeSpace::shape_dx(int local, double xi) const {
  double d;
  if (order_ == 1) {
    d = local == 0 ? -1.0 : 1.0;
  } else {
    switch (local) {
      case 0:
        d = 4.0 * xi - 3.0;
        break;
      case 1:
        d = 4.0 - 8.0 * xi;
        break;
      default:
        d = 4.0 * xi - 1.0;
        break;
    }
  }
  return d / h_;
}

double FeSpace::evaluate(const Vector& coeffs, double x) const {
  if (coeffs.size() != dim_v()) throw std::invalid_argument("FeSpace::evaluate: size mismatch");
  int cell = static_cast<int>(std::floor(x / h_));
  cell = std::clamp(cell, 0, n_cells_ - 1);
  const double xi = (x - cell * h_) / h_;
  double v = 0.0;
  for (int a = 0; a <= order_; ++a) v += coeffs[cell_dof(cell, a)] * shape(a, xi);
  return v;
}

FeSpace build_space(const ProblemDefinition& problem, int n_cells, int order) {
  return FeSpace(problem.length, n_cells, order);
}

}  // namespace hrb
