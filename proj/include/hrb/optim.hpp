#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hrb/estimators.hpp"
#include "hrb/greedy.hpp"
#include "hrb/model.hpp"

namespace hrb {

/// Data coefficients w^k over V0 (n x K) and, for synthetic data, how they were made.
struct MeasurementData {
  Matrix w;
  std::optional<ParameterVector> mu_star;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;
};

/// w = q(mu*) + i.i.d. N(0, variance) nodal noise; deterministic for a fixed seed.
MeasurementData generate_data(const FullOrderModel& fom, const ParameterVector& mu_star,
                              double noise_variance, std::uint64_t seed);

struct CostConfig {
  double alpha_j = 1e5;
  double lambda = 1e-7;
  ParameterVector mu_ref = ParameterVector::Constant(3.0);

  void validate() const;
};

/// J = alpha/2 misfit + lambda/2 |mu - mu_ref|^2 with misfit = sum_k alpha_k ||q^k - w^k||_M^2.
struct CostValue {
  double j = 0.0;
  double misfit = 0.0;
};

CostValue cost_fom(const ParameterVector& mu, const StateTrajectory& traj, const MeasurementData& data,
                   const CostConfig& cfg, const AssembledOperators& ops);
ParameterVector grad_fom(const ParameterVector& mu, const StateTrajectory& traj,
                         const SensitivityTrajectory& sens, const MeasurementData& data,
                         const CostConfig& cfg, const AssembledOperators& ops);

/// Reduced cost from the r1/r2 expansion; \p rom must carry cost data (attach_cost).
CostValue cost_rom(const ParameterVector& mu, const RomTrajectory& traj, const RomOperators& rom,
                   const CostConfig& cfg, const TimeGrid& grid);
ParameterVector grad_rom(const ParameterVector& mu, const RomTrajectory& traj,
                         const RomSensitivities& sens, const RomOperators& rom,
                         const CostConfig& cfg, const TimeGrid& grid);

/// mu - P(mu - g), whose norm is the first-order stationarity measure.
ParameterVector projected_gradient(const ParameterVector& mu, const ParameterVector& g,
                                   const ParameterBox& box);

/// Cost, gradient and the trust-region accuracy measure of one reduced model at one parameter.
struct SurrogatePoint {
  ParameterVector mu;
  double j = 0.0;
  double delta_j = 0.0;
  ParameterVector grad = ParameterVector::Zero();
  bool has_grad = false;

  double ratio() const { return j > 0.0 ? delta_j / j : 0.0; }  ///< Delta_J / J
};

/// Reduced cost functional with error bound; big-model solve supplies Delta^{l,m}_q.
class Surrogate {
 public:
  Surrogate(const ReducedModel& model, double sigma_q, const CostConfig& cfg,
            const ProblemDefinition& problem, const TimeGrid& grid, const NewtonConfig& newton);

  SurrogatePoint evaluate(const ParameterVector& mu, bool with_grad) const;
  double sigma_q() const { return sigma_q_; }

 private:
  const ReducedModel* model_;
  RomOperators small_;
  double sigma_q_;
  CostConfig cfg_;
  const ProblemDefinition* problem_;
  const TimeGrid* grid_;
  NewtonConfig newton_;
};

struct AgcResult {
  SurrogatePoint point;
  bool stagnated = false;
};

/// Projected backtracking along -grad from \p start (needs the gradient) with Armijo
/// decrease and ratio() <= radius; step halving from 1, at most 30 times.
AgcResult agc_point(const Surrogate& s, const SurrogatePoint& start, const ParameterBox& box,
                    double radius);

struct SubproblemConfig {
  double gtol = 1e-7;
  int max_iter = 50;
  double boundary_fraction = 0.95;  ///< ratio >= this * radius counts as on the boundary
};

/// Projected BFGS on the surrogate from the AGC point; stops at the trust-region boundary,
/// at a projected-gradient norm below gtol, or at the iteration cap.
SurrogatePoint solve_tr_subproblem(const Surrogate& s, const SurrogatePoint& agc,
                                   const ParameterBox& box, double radius,
                                   const SubproblemConfig& cfg = {});

struct TrConfig {
  double radius0 = 0.1;
  double shrink = 0.5;
  double enlarge = 2.0;
  double tol = 1e-5;  ///< on || mu - P(mu - grad J^h(mu)) ||
  int max_iter = 30;
  int max_rejections = 10;  ///< consecutive shrinks before giving up
  PodRule primary_rule = PodRule::energy(1e-10, 5);
  int enlarged_dim = 2;
  double deim_tol = 1e-14;
  double sigma_fallback = 0.5;
  SubproblemConfig sub;
  const GreedyResult* initial = nullptr;  ///< start from these spaces instead of a fresh build
  bool verbose = false;

  void validate() const;
};

struct OptimStep {
  int iteration = 0;
  ParameterVector mu;
  double j_rom = 0.0;
  double delta_j = 0.0;
  double j_fom = 0.0;
  double radius = 0.0;
  bool accepted = false;
  long fom_solves = 0;
  int ly = 0, lq = 0;
  double pg_norm = 0.0;
};

struct OptimResult {
  ParameterVector mu_opt;
  double cost = 0.0;
  int iterations = 0;
  long fom_solves = 0;
  double seconds = 0.0;
  bool converged = false;  ///< stopping test met
  double pg_norm = 0.0;
  std::optional<double> e_abs, e_rel;
  std::vector<OptimStep> trace;
};

OptimResult run_tr_rb(const FullOrderModel& fom, const MeasurementData& data, const CostConfig& cfg,
                      const ParameterVector& mu0, const TrConfig& tr = {});

struct FoConfig {
  double tol = 1e-5;  ///< on || mu - P(mu - grad J^h(mu)) ||
  int max_iter = 200;
  int max_line_search = 30;
  bool verbose = false;
};

/// Projected BFGS on the full-order cost.
OptimResult run_fo_reference(const FullOrderModel& fom, const MeasurementData& data,
                             const CostConfig& cfg, const ParameterVector& mu0,
                             const FoConfig& fo = {});

/// Generic box-constrained projected BFGS used by the reference and the subproblem.
struct BfgsPoint {
  ParameterVector mu;
  double f = 0.0;
  ParameterVector g = ParameterVector::Zero();
};

struct BfgsOptions {
  double gtol = 1e-5;
  int max_iter = 200;
  int max_line_search = 30;
  double armijo = 1e-4;
};

struct BfgsOutcome {
  BfgsPoint best;
  int iterations = 0;
  bool converged = false;        ///< projected gradient below gtol
  bool line_search_failed = false;
  bool stopped = false;          ///< the accept callback ended the run
};

/// \p eval returns nullopt when the point is rejected (e.g. outside the trust region);
/// \p accept, when set, is called on each new iterate and returns false to stop after it.
BfgsOutcome projected_bfgs(const std::function<std::optional<BfgsPoint>(const ParameterVector&)>& eval,
                           const BfgsPoint& start, const ParameterBox& box, const BfgsOptions& opt,
                           const std::function<bool(const BfgsPoint&)>& accept = {});

}  // namespace hrb
