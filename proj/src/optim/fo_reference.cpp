#include <chrono>
#include <iostream>

#include "hrb/errors.hpp"
#include "hrb/optim.hpp"

namespace hrb {

OptimResult run_fo_reference(const FullOrderModel& fom, const MeasurementData& data,
                             const CostConfig& cfg, const ParameterVector& mu0, const FoConfig& fo) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const long solves0 = fom.solve_count();
  const ParameterBox& box = fom.problem().box;
  OptimResult res;

  auto eval = [&](const ParameterVector& mu) -> std::optional<BfgsPoint> {
    try {
      const StateTrajectory traj = fom.solve(mu);
      const SensitivityTrajectory sens = fom.sensitivities(mu, traj);
      BfgsPoint p{mu, cost_fom(mu, traj, data, cfg, fom.ops()).j,
                  grad_fom(mu, traj, sens, data, cfg, fom.ops())};
      return p;
    } catch (const NumericalError& e) {
      if (fo.verbose) std::cerr << "[fo] rejected " << to_string(mu) << ": " << e.what() << '\n';
      return std::nullopt;
    }
  };

  const std::optional<BfgsPoint> start = eval(box.project(mu0));
  if (!start) throw NumericalError("fo reference: full-order solve failed at the initial point");
  auto log_step = [&](const BfgsPoint& p) {
    OptimStep s;
    s.iteration = static_cast<int>(res.trace.size());
    s.mu = p.mu;
    s.j_fom = p.f;
    s.accepted = true;
    s.fom_solves = fom.solve_count() - solves0;
    s.pg_norm = projected_gradient(p.mu, p.g, box).norm();
    res.trace.push_back(s);
    if (fo.verbose)
      std::cerr << "[fo] iteration " << s.iteration << ": mu=" << to_string(p.mu) << " J=" << p.f
                << " pg=" << s.pg_norm << '\n';
    return true;
  };
  log_step(*start);
  const BfgsOutcome out = projected_bfgs(eval, *start, box,
                                         {fo.tol, fo.max_iter, fo.max_line_search, 1e-4}, log_step);

  res.mu_opt = out.best.mu;
  res.cost = out.best.f;
  res.iterations = out.iterations;
  res.pg_norm = projected_gradient(out.best.mu, out.best.g, box).norm();
  res.converged = out.converged;
  res.fom_solves = fom.solve_count() - solves0;
  if (data.mu_star) {
    res.e_abs = (*data.mu_star - res.mu_opt).norm();
    res.e_rel = *res.e_abs / data.mu_star->norm();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace hrb
