#pragma once

#include <random>

#include "hrb/model.hpp"

namespace hrb::test {

/// Coarse instance for property tests.
inline ProblemDefinition small_problem(InputSignal input = InputSignal::constant(1.0),
                                       double final_time = 1.0) {
  ProblemDefinition p;
  p.final_time = final_time;
  p.input = std::move(input);
  return p;
}

inline ParameterVector random_mu(std::mt19937_64& rng, const ParameterBox& box = {}) {
  ParameterVector mu;
  for (int i = 0; i < 4; ++i) mu[i] = std::uniform_real_distribution<double>(box.lower[i], box.upper[i])(rng);
  return mu;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

/// sum_k w_k x_k^T S x_k for trajectories stored column-wise.
inline double weighted_norm2(const Matrix& x, const SymBandMatrix& s, const TimeGrid& grid) {
  double acc = 0.0;
  for (int k = 0; k < grid.size(); ++k) acc += grid.weight(k) * s.quadratic_form(x.col(k));
  return acc;
}

/// Nested POD model from full-order solves at \p mus; the leading (ly, lq) columns form the
/// small model.
inline ReducedModel nested_model(const FullOrderModel& fom, const std::vector<ParameterVector>& mus,
                                 int ly, int my, int lq, int mq, int lf) {
  const AssembledOperators& ops = fom.ops();
  Matrix ys(ops.dim_y(), 0), qs(ops.dim_q(), 0), fs(ops.dim_q(), 0);
  auto append = [](Matrix& a, const Matrix& b) {
    a.conservativeResize(Eigen::NoChange, a.cols() + b.cols());
    a.rightCols(b.cols()) = b;
  };
  for (const ParameterVector& mu : mus) {
    const StateTrajectory h = fom.solve(mu);
    append(ys, h.y);
    append(qs, h.q);
    append(fs, nonlinearity_snapshots(h).bottomRows(ops.dim_q()));
  }
  NestedBases b;
  b.y = pod(ys, ops.gram_y, PodRule::fixed_rank(my)).basis;
  b.q = pod(qs, ops.gram_q, PodRule::fixed_rank(mq)).basis;
  b.ly = ly;
  b.lq = lq;
  return fom.reduce(std::move(b), deim_build(fs, lf));
}

}  // namespace hrb::test
