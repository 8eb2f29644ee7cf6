#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "hrb/errors.hpp"
#include "hrb/optim.hpp"

namespace hrb {

Surrogate::Surrogate(const ReducedModel& model, double sigma_q, const CostConfig& cfg,
                     const ProblemDefinition& problem, const TimeGrid& grid,
                     const NewtonConfig& newton)
    : model_(&model),
      small_(model.small()),
      sigma_q_(sigma_q),
      cfg_(cfg),
      problem_(&problem),
      grid_(&grid),
      newton_(newton) {
  if (!model.big.has_cost()) throw std::invalid_argument("Surrogate: reduced model carries no data");
  if (!(sigma_q >= 0.0 && sigma_q < 1.0))
    throw std::invalid_argument("Surrogate: sigma_q must lie in [0, 1)");
}

SurrogatePoint Surrogate::evaluate(const ParameterVector& mu, bool with_grad) const {
  const RomTrajectory rs = solve_rom(mu, small_, *grid_, newton_);
  const RomTrajectory rb = solve_rom(mu, model_->big, *grid_, newton_);
  const CostValue c = cost_rom(mu, rs, small_, cfg_, *grid_);
  const double dq = delta_l(delta_lm(rs, rb, model_->big, *grid_).q, sigma_q_);
  SurrogatePoint p;
  p.mu = mu;
  p.j = c.j;
  p.delta_j = delta_J(dq, c.misfit, cfg_.alpha_j, problem_->length);
  if (with_grad) {
    p.grad = grad_rom(mu, rs, solve_rom_sensitivities(mu, small_, rs, *grid_), small_, cfg_, *grid_);
    p.has_grad = true;
  }
  return p;
}

AgcResult agc_point(const Surrogate& s, const SurrogatePoint& start, const ParameterBox& box,
                    double radius) {
  if (!start.has_grad) throw std::invalid_argument("agc_point: start point needs a gradient");
  AgcResult r{start, true};
  if (start.grad.isZero(0.0)) return r;
  double t = 1.0;
  for (int h = 0; h <= 30; ++h, t *= 0.5) {
    const ParameterVector mu = box.project(start.mu - t * start.grad);
    if (mu == start.mu) break;
    try {
      const SurrogatePoint p = s.evaluate(mu, true);
      if (p.j <= start.j + 1e-4 * start.grad.dot(mu - start.mu) && p.ratio() <= radius)
        return {p, false};
    } catch (const NumericalError&) {
    }
  }
  return r;
}

SurrogatePoint solve_tr_subproblem(const Surrogate& s, const SurrogatePoint& agc,
                                   const ParameterBox& box, double radius,
                                   const SubproblemConfig& cfg) {
  std::vector<SurrogatePoint> seen;
  auto eval = [&](const ParameterVector& mu) -> std::optional<BfgsPoint> {
    try {
      SurrogatePoint p = s.evaluate(mu, true);
      if (p.ratio() > radius) return std::nullopt;
      seen.push_back(p);
      return BfgsPoint{p.mu, p.j, p.grad};
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };
  auto lookup = [&](const ParameterVector& mu) {
    for (auto it = seen.rbegin(); it != seen.rend(); ++it)
      if (it->mu == mu) return *it;
    return agc;
  };
  auto inside = [&](const BfgsPoint& p) {
    return lookup(p.mu).ratio() < cfg.boundary_fraction * radius;
  };
  if (!inside({agc.mu, agc.j, agc.grad})) return agc;
  const BfgsOutcome out =
      projected_bfgs(eval, {agc.mu, agc.j, agc.grad}, box, {cfg.gtol, cfg.max_iter, 30, 1e-4}, inside);
  SurrogatePoint best = lookup(out.best.mu);
  if (best.j > agc.j) return agc;
  return best;
}

void TrConfig::validate() const {
  if (!(radius0 > 0.0) || !(shrink > 0.0 && shrink < 1.0) || !(enlarge >= 1.0) || !(tol > 0.0) ||
      max_iter < 0 || enlarged_dim < 1 || !(sigma_fallback >= 0.0 && sigma_fallback < 1.0))
    throw std::invalid_argument("trust-region configuration is invalid");
}

namespace {

// E_m^2 / E_l^2 for the q field, if it is a usable saturation constant.
std::optional<double> sigma_at(const ParameterVector& mu, const StateTrajectory& traj,
                               const ReducedModel& model, const AssembledOperators& ops,
                               const TimeGrid& grid, const NewtonConfig& newton) {
  try {
    const FieldPair el = true_error(traj, solve_rom(mu, model.small(), grid, newton), model.bases, ops);
    const FieldPair em = true_error(traj, solve_rom(mu, model.big, grid, newton), model.bases, ops);
    if (!(el.q > 0.0)) return std::nullopt;
    const double s = em.q * em.q / (el.q * el.q);
    if (s >= 0.0 && s < 1.0) return s;
  } catch (const NumericalError&) {
  }
  return std::nullopt;
}

}  // namespace

OptimResult run_tr_rb(const FullOrderModel& fom, const MeasurementData& data, const CostConfig& cfg,
                      const ParameterVector& mu0, const TrConfig& tr) {
  cfg.validate();
  tr.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const long solves0 = fom.solve_count();
  const AssembledOperators& ops = fom.ops();
  const TimeGrid& grid = fom.grid();
  const ParameterBox& box = fom.problem().box;
  auto log = [&](const std::string& msg) {
    if (tr.verbose) std::cerr << "[tr-rb] " << msg << '\n';
  };

  HierarchicalSpaces hs(ops);
  auto rebuild = [&] {
    ReducedModel m = fom.reduce(hs.bases(), hs.build_deim(tr.deim_tol));
    attach_cost(m, ops, data.w);
    return m;
  };
  auto append = [&](const SnapshotSet& snap) {
    hs.append_primary_y(hs.primary_candidates_y(snap.traj.y, tr.primary_rule));
    hs.append_primary_q(hs.primary_candidates_q(snap.traj.q, tr.primary_rule));
  };
  auto enrich = [&](const SnapshotSet& snap) {
    hs.add_pool(snap);
    hs.add_f_snapshots(snap.f_v0());
    append(snap);
  };

  ParameterVector mu = box.project(mu0);
  SnapshotSet snap = take_snapshots(fom, mu);
  if (tr.initial) {
    hs.assign(tr.initial->model.bases, tr.initial->f_compressed);
    enrich(snap);
  } else {
    hs.initialize(snap, tr.primary_rule, tr.enlarged_dim);
    append(snap);
  }
  ReducedModel model = rebuild();

  double j_fom = cost_fom(mu, snap.traj, data, cfg, ops).j;
  double pg = projected_gradient(mu, grad_fom(mu, snap.traj, snap.sens, data, cfg, ops), box).norm();
  double sigma = sigma_at(mu, snap.traj, model, ops, grid, fom.newton()).value_or(tr.sigma_fallback);
  double radius = tr.radius0;

  OptimResult res;
  auto record = [&](int it, const ParameterVector& at, const SurrogatePoint& p, bool accepted) {
    OptimStep s;
    s.iteration = it;
    s.mu = at;
    s.j_rom = p.j;
    s.delta_j = p.delta_j;
    s.j_fom = j_fom;
    s.radius = radius;
    s.accepted = accepted;
    s.fom_solves = fom.solve_count() - solves0;
    s.ly = hs.ly();
    s.lq = hs.lq();
    s.pg_norm = pg;
    res.trace.push_back(s);
    std::ostringstream os;
    os << "iteration " << it << (accepted ? " accept " : " reject ") << to_string(at)
       << " J_rb=" << p.j << " Delta_J=" << p.delta_j << " J_h=" << j_fom << " radius=" << radius
       << " pg=" << pg << " sigma_q=" << sigma << " l=(" << s.ly << "," << s.lq << ")";
    log(os.str());
  };
  record(0, mu, {mu, j_fom}, true);

  int it = 0;
  int rejections = 0;
  while (pg > tr.tol && it < tr.max_iter && rejections <= tr.max_rejections) {
    const Surrogate sur(model, sigma, cfg, fom.problem(), grid, fom.newton());
    const SurrogatePoint cur = sur.evaluate(mu, true);
    const AgcResult agc = agc_point(sur, cur, box, radius);
    const SurrogatePoint cand = solve_tr_subproblem(sur, agc.point, box, radius, tr.sub);
    const double threshold = agc.point.j;

    if (cand.mu == mu || cand.j - cand.delta_j > threshold) {
      // Even the optimistic bound misses the target: the model is not trusted this far.
      radius *= tr.shrink;
      ++rejections;
      record(it + 1, cand.mu, cand, false);
      if (cand.mu == mu && agc.stagnated) break;
      continue;
    }
    const bool sufficient = cand.j + cand.delta_j <= threshold;
    SnapshotSet next = take_snapshots(fom, cand.mu);
    const std::optional<double> sigma_old =
        sigma_at(cand.mu, next.traj, model, ops, grid, fom.newton());
    enrich(next);
    model = rebuild();
    bool accepted = sufficient;
    if (!accepted) {
      try {
        accepted = Surrogate(model, sigma, cfg, fom.problem(), grid, fom.newton())
                       .evaluate(cand.mu, false)
                       .j <= threshold;
      } catch (const NumericalError&) {
        accepted = false;
      }
    }
    ++it;
    if (accepted) {
      mu = cand.mu;
      snap = std::move(next);
      j_fom = cost_fom(mu, snap.traj, data, cfg, ops).j;
      pg = projected_gradient(mu, grad_fom(mu, snap.traj, snap.sens, data, cfg, ops), box).norm();
      sigma = sigma_old.value_or(
          sigma_at(mu, snap.traj, model, ops, grid, fom.newton()).value_or(sigma));
      if (cand.ratio() <= 0.25 * radius) radius *= tr.enlarge;
      rejections = 0;
    } else {
      radius *= tr.shrink;
      ++rejections;
    }
    record(it, cand.mu, cand, accepted);
  }

  res.mu_opt = mu;
  res.cost = j_fom;
  res.iterations = it;
  res.pg_norm = pg;
  res.converged = pg <= tr.tol;
  res.fom_solves = fom.solve_count() - solves0;
  if (data.mu_star) {
    res.e_abs = (*data.mu_star - mu).norm();
    res.e_rel = *res.e_abs / data.mu_star->norm();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace hrb
