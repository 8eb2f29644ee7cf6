#pragma once

#include <atomic>

#include "hrb/fe.hpp"
#include "hrb/fom.hpp"
#include "hrb/problem.hpp"
#include "hrb/rom.hpp"

namespace hrb {

/// A discretised problem instance: space, operators, time grid and Newton settings,
/// plus a counter of full-order trajectory solves.
class FullOrderModel {
 public:
  FullOrderModel(ProblemDefinition problem, int n_cells, int order, int time_nodes,
                 NewtonConfig newton = {});
  FullOrderModel(const FullOrderModel&) = delete;
  FullOrderModel& operator=(const FullOrderModel&) = delete;

  const ProblemDefinition& problem() const noexcept { return problem_; }
  const FeSpace& space() const noexcept { return space_; }
  const AssembledOperators& ops() const noexcept { return ops_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const NewtonConfig& newton() const noexcept { return newton_; }

  StateTrajectory solve(const ParameterVector& mu) const;
  SensitivityTrajectory sensitivities(const ParameterVector& mu, const StateTrajectory& traj) const;
  ReducedModel reduce(NestedBases bases, DeimInterpolant deim) const;

  long solve_count() const noexcept { return solves_.load(); }
  void reset_solve_count() noexcept { solves_ = 0; }

 private:
  ProblemDefinition problem_;
  FeSpace space_;
  AssembledOperators ops_;
  TimeGrid grid_;
  NewtonConfig newton_;
  mutable std::atomic<long> solves_{0};
};

}  // namespace hrb
