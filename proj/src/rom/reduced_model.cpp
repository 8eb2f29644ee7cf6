#include <Eigen/LU>
#include <stdexcept>

#include "hrb/rom.hpp"

namespace hrb {

namespace {

// A B^{-1} for square B.
Matrix right_solve(const Matrix& a, const Matrix& b) {
  return b.transpose().partialPivLu().solve(a.transpose()).transpose();
}

Matrix sample_rows(const Matrix& basis, const std::vector<int>& rows, int offset) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), basis.cols());
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(a) = basis.row(rows[a] + offset);
  return out;
}

}  // namespace

RomOperators RomOperators::truncate(int ly, int lq) const {
  if (ly < 1 || lq < 1 || ly > ny || lq > nq)
    throw std::invalid_argument("RomOperators::truncate: sizes out of range");
  RomOperators r;
  r.ny = ly;
  r.nq = lq;
  r.mass_y = mass_y.topLeftCorner(ly, ly);
  r.stiffness_1 = stiffness_1.topLeftCorner(ly, ly);
  r.mass_q = mass_q.topLeftCorner(lq, lq);
  r.stiffness_2 = stiffness_2.topLeftCorner(lq, lq);
  r.g_y = g_y.topRows(ly);
  r.g_q = g_q.topRows(lq);
  r.sample_y = sample_y.leftCols(ly);
  r.sample_q = sample_q.leftCols(lq);
  r.input = input.topRows(lq);
  r.y_init = y_init.head(ly);
  r.gram_y = gram_y.topLeftCorner(ly, ly);
  r.gram_q = gram_q.topLeftCorner(lq, lq);
  if (has_cost()) {
    r.cost_r1 = cost_r1.topRows(lq);
    r.cost_r2 = cost_r2;
  }
  return r;
}

ReducedModel project_operators(const AssembledOperators& ops, const ProblemDefinition& problem,
                               const FeSpace& space, const TimeGrid& grid, NestedBases bases,
                               DeimInterpolant deim) {
  const Matrix& py = bases.y;
  const Matrix& pq = bases.q;
  if (py.rows() != ops.dim_y() || pq.rows() != ops.dim_q() ||
      deim.basis.rows() != ops.dim_q())
    throw std::invalid_argument("project_operators: dimension mismatch");
  if (bases.ly < 1 || bases.lq < 1 || bases.ly > bases.my() || bases.lq > bases.mq())
    throw std::invalid_argument("project_operators: nested sizes out of range");

  RomOperators r;
  r.ny = bases.my();
  r.nq = bases.mq();
  const Matrix my_py = ops.mass_y * py;
  const Matrix mq_pq = ops.mass_q * pq;
  r.mass_y = py.transpose() * my_py;
  r.stiffness_1 = py.transpose() * (ops.stiffness_1 * py);
  r.mass_q = pq.transpose() * mq_pq;
  r.stiffness_2 = pq.transpose() * (ops.stiffness_2 * pq);
  r.gram_y = py.transpose() * (ops.gram_y * py);
  r.gram_q = pq.transpose() * (ops.gram_q * pq);

  r.g_y = right_solve(my_py.transpose() * deim.padded_basis(), deim.sampled_basis);
  r.g_q = right_solve(mq_pq.transpose() * deim.basis, deim.sampled_basis);
  r.sample_y = sample_rows(py, deim.points, 1);
  r.sample_q = sample_rows(pq, deim.points, 0);

  r.input.resize(r.nq, grid.size());
  for (int k = 0; k < grid.size(); ++k)
    r.input.col(k) = pq.transpose() * boundary_vector(problem, space, grid.time(k));
  r.y_init = py.transpose() * load_vector(space, problem.y_init);

  return ReducedModel{std::move(bases), std::move(deim), std::move(r)};
}

void attach_cost(ReducedModel& model, const AssembledOperators& ops, const Matrix& data) {
  if (data.rows() != ops.dim_q() || data.cols() != model.big.input.cols())
    throw std::invalid_argument("attach_cost: data must be n x K");
  const Matrix mw = ops.mass_q * data;
  model.big.cost_r1 = model.bases.q.transpose() * mw;
  model.big.cost_r2 = (data.array() * mw.array()).colwise().sum().transpose();
}

Matrix lift_y(const NestedBases& bases, const Matrix& coeffs) {
  return bases.y.leftCols(coeffs.rows()) * coeffs;
}

Matrix lift_q(const NestedBases& bases, const Matrix& coeffs) {
  return bases.q.leftCols(coeffs.rows()) * coeffs;
}

}  // namespace hrb
