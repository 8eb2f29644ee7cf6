#include <stdexcept>
#include <string>

#include "hrb/fe.hpp"

namespace hrb {

namespace {

void check_positive(const char* name, double value, double x) {
  if (!(value > 0.0))
    throw std::invalid_argument(std::string("assemble: ") + name + " must be positive, got " +
                                std::to_string(value) + " at x=" + std::to_string(x));
}

}  // namespace

AssembledOperators assemble(const ProblemDefinition& problem, const FeSpace& space) {
  const int p = space.order();
  const std::size_t nv = static_cast<std::size_t>(space.dim_v());
  const std::size_t bw = static_cast<std::size_t>(p);
  const double h = space.cell_width();
  const QuadratureRule rule = QuadratureRule::gauss(p + 1);

  SymBandMatrix mass(nv, bw), k1(nv, bw), k2(nv, bw), plain(nv, bw);
  for (int c = 0; c < space.n_cells(); ++c) {
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      const double xi = rule.points[g];
      const double x = (c + xi) * h;
      const double w = rule.weights[g] * h;
      const double c1 = problem.kappa1(x);
      const double c2 = problem.kappa2(x);
      check_positive("kappa1", c1, x);
      check_positive("kappa2", c2, x);
      for (int a = 0; a <= p; ++a) {
        const double va = space.shape(a, xi);
        const double da = space.shape_dx(a, xi);
        const auto ia = static_cast<std::size_t>(space.cell_dof(c, a));
        // Upper triangle of the element matrix only; add() mirrors it.
        for (int b = a; b <= p; ++b) {
          const double vb = space.shape(b, xi);
          const double db = space.shape_dx(b, xi);
          const auto ib = static_cast<std::size_t>(space.cell_dof(c, b));
          mass.add(ia, ib, w * va * vb);
          k1.add(ia, ib, w * c1 * da * db);
          k2.add(ia, ib, w * c2 * da * db);
          plain.add(ia, ib, w * da * db);
        }
      }
    }
  }

  AssembledOperators ops{mass,
                         k1,
                         mass.trailing(1),
                         k2.trailing(1),
                         mass + plain,
                         plain.trailing(1),
                         plain,
                         space.boundary_index()};
  return ops;
}

Vector load_vector(const FeSpace& space, const ScalarFunction& g) {
  const QuadratureRule rule = QuadratureRule::gauss(5);
  const double h = space.cell_width();
  Vector out = Vector::Zero(space.dim_v());
  for (int c = 0; c < space.n_cells(); ++c) {
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const double xi = rule.points[k];
      const double gx = g((c + xi) * h) * rule.weights[k] * h;
      for (int a = 0; a <= space.order(); ++a) out[space.cell_dof(c, a)] += gx * space.shape(a, xi);
    }
  }
  return out;
}

Vector project_initial(const ProblemDefinition& problem, const FeSpace& space,
                       const AssembledOperators& ops) {
  return SymBandCholesky(ops.mass_y).solve(load_vector(space, problem.y_init));
}

Vector boundary_vector(const ProblemDefinition& problem, const FeSpace& space, double t) {
  Vector b = Vector::Zero(space.dim_v0());
  b[space.boundary_index()] = problem.input(t);
  return b;
}

}  // namespace hrb
