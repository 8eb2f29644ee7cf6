#include "hrb/model.hpp"

namespace hrb {

FullOrderModel::FullOrderModel(ProblemDefinition problem, int n_cells, int order, int time_nodes,
                               NewtonConfig newton)
    : problem_((problem.validate(), std::move(problem))),
      space_(build_space(problem_, n_cells, order)),
      ops_(assemble(problem_, space_)),
      grid_(problem_.final_time, time_nodes),
      newton_(newton) {
  newton_.validate();
}

StateTrajectory FullOrderModel::solve(const ParameterVector& mu) const {
  ++solves_;
  return solve_fom(mu, problem_, space_, ops_, grid_, newton_);
}

SensitivityTrajectory FullOrderModel::sensitivities(const ParameterVector& mu,
                                                    const StateTrajectory& traj) const {
  return solve_sensitivities(mu, traj, ops_);
}

ReducedModel FullOrderModel::reduce(NestedBases bases, DeimInterpolant deim) const {
  return project_operators(ops_, problem_, space_, grid_, std::move(bases), std::move(deim));
}

}  // namespace hrb
