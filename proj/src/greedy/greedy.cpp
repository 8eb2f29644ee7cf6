#include "hrb/greedy.hpp"

#include <chrono>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "hrb/errors.hpp"
#include "hrb/parallel.hpp"

namespace hrb {

namespace {

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

Matrix SnapshotSet::y_pool() const {
  Matrix out = traj.y;
  for (const Matrix& s : sens.s_y) out = hcat(out, s);
  return out;
}

Matrix SnapshotSet::q_pool() const {
  Matrix out = traj.q;
  for (const Matrix& s : sens.s_q) out = hcat(out, s);
  return out;
}

Matrix SnapshotSet::f_v0() const {
  const Matrix f = nonlinearity_snapshots(traj);
  return f.bottomRows(f.rows() - 1);
}

SnapshotSet take_snapshots(const FullOrderModel& fom, const ParameterVector& mu) {
  SnapshotSet s;
  s.mu = mu;
  s.traj = fom.solve(mu);
  s.sens = fom.sensitivities(mu, s.traj);
  return s;
}

Matrix project_out(const Matrix& x, const Matrix& basis, const SymBandMatrix& gram) {
  if (basis.cols() == 0) return x;
  const Matrix sb = gram * basis;
  Matrix r = x;
  for (int pass = 0; pass < 2; ++pass) r -= basis * (sb.transpose() * r);
  return r;
}

Matrix FieldSpaces::enlarged() const { return hcat(primary, extra); }

void HierarchicalSpaces::initialize(const SnapshotSet& snap, const PodRule& primary_rule,
                                    int enlarged_dim) {
  const AssembledOperators& ops = *ops_;
  y_ = {};
  q_ = {};
  f_.resize(0, 0);
  y_.primary = pod(snap.traj.y, ops.gram_y, primary_rule).basis;
  q_.primary = pod(snap.traj.q, ops.gram_q, primary_rule).basis;
  y_.extra = Matrix(ops.dim_y(), 0);
  q_.extra = Matrix(ops.dim_q(), 0);
  add_pool(snap);
  add_f_snapshots(snap.f_v0());
  enrich_extra(y_, snap.y_pool(), enlarged_dim, ops.gram_y);
  enrich_extra(q_, snap.q_pool(), enlarged_dim, ops.gram_q);
}

Matrix HierarchicalSpaces::primary_candidates_y(const Matrix& snapshots, const PodRule& rule) const {
  const Matrix r = project_out(snapshots, y_.primary, ops_->gram_y);
  return orthonormalize(y_.primary, pod(r, ops_->gram_y, rule).basis, ops_->gram_y);
}

Matrix HierarchicalSpaces::primary_candidates_q(const Matrix& snapshots, const PodRule& rule) const {
  const Matrix r = project_out(snapshots, q_.primary, ops_->gram_q);
  return orthonormalize(q_.primary, pod(r, ops_->gram_q, rule).basis, ops_->gram_q);
}

void HierarchicalSpaces::append_primary_y(const Matrix& modes) {
  append_primary(y_, modes, ops_->gram_y);
}
void HierarchicalSpaces::append_primary_q(const Matrix& modes) {
  append_primary(q_, modes, ops_->gram_q);
}

void HierarchicalSpaces::append_primary(FieldSpaces& fs, const Matrix& modes,
                                        const SymBandMatrix& gram) {
  const Matrix add = orthonormalize(fs.primary, modes, gram);
  fs.primary = hcat(fs.primary, add);
  const Eigen::Index want = fs.extra.cols();
  fs.extra = orthonormalize(fs.primary, fs.extra, gram);
  if (fs.extra.cols() < want)
    enrich_extra(fs, fs.pool, static_cast<int>(want - fs.extra.cols()), gram);
}

void HierarchicalSpaces::enrich_extra_y(const Matrix& snapshots, int count) {
  enrich_extra(y_, snapshots, count, ops_->gram_y);
}
void HierarchicalSpaces::enrich_extra_q(const Matrix& snapshots, int count) {
  enrich_extra(q_, snapshots, count, ops_->gram_q);
}

void HierarchicalSpaces::enrich_extra(FieldSpaces& fs, const Matrix& snapshots, int count,
                                      const SymBandMatrix& gram) {
  if (count < 1) return;
  const Matrix current = fs.enlarged();
  const Matrix r = project_out(snapshots, current, gram);
  const PodResult p = pod(r, gram, PodRule::fixed_rank(count));
  fs.extra = hcat(fs.extra, orthonormalize(current, p.basis, gram));
}

void HierarchicalSpaces::add_pool(const SnapshotSet& snap) {
  y_.pool = hcat(y_.pool, snap.y_pool());
  q_.pool = hcat(q_.pool, snap.q_pool());
}

void HierarchicalSpaces::add_f_snapshots(const Matrix& f) { f_ = hcat(f_, f); }

DeimInterpolant HierarchicalSpaces::build_deim(double energy_tol) const {
  return deim_build(f_, energy_tol, 3 * (ly() + lq()));
}

void HierarchicalSpaces::assign(const NestedBases& b, const Matrix& f) {
  y_ = {b.y.leftCols(b.ly), b.y.rightCols(b.my() - b.ly), b.y};
  q_ = {b.q.leftCols(b.lq), b.q.rightCols(b.mq() - b.lq), b.q};
  f_ = f;
}

Matrix HierarchicalSpaces::compressed_f() const {
  const PodResult p = pod(f_, PodRule::energy(0.0));
  return p.basis * p.singular_values.head(p.basis.cols()).asDiagonal();
}

NestedBases HierarchicalSpaces::bases() const {
  return {y_.enlarged(), q_.enlarged(), ly(), lq()};
}

void GreedyConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("greedy: tolerance must be positive");
  if (max_basis < 1) throw std::invalid_argument("greedy: basis cap must be positive");
  if (training.empty()) throw std::invalid_argument("greedy: training set is empty");
  if (enlarged_dim < 1 || saturation_increment < 1)
    throw std::invalid_argument("greedy: enlargement sizes must be positive");
}

std::vector<EstimatorReport> error_indicator(const std::vector<ParameterVector>& params,
                                             const ReducedModel& model,
                                             const EstimatorCalibration& cal,
                                             const TimeGrid& grid, const NewtonConfig& cfg) {
  const RomOperators small = model.small();
  std::vector<EstimatorReport> out(params.size());
  parallel_for(params.size(), [&](std::size_t i) {
    try {
      out[i] = estimate(params[i], model, small, cal, grid, cfg);
    } catch (const NumericalError& e) {
      std::cerr << "warning: skipping " << to_string(params[i]) << ": " << e.what() << '\n';
      out[i].indicator = -1.0;
    }
  });
  return out;
}

std::size_t argmax_indicator(const std::vector<EstimatorReport>& reports,
                             const std::vector<ParameterVector>& params) {
  if (reports.empty() || reports.size() != params.size())
    throw std::invalid_argument("argmax_indicator: size mismatch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double a = reports[i].indicator, b = reports[best].indicator;
    if (a > b || (a == b && lexicographic_less(params[i], params[best]))) best = i;
  }
  return best;
}

GreedyResult run_weak_greedy(const GreedyConfig& cfg, const FullOrderModel& fom) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const long solves0 = fom.solve_count();
  const AssembledOperators& ops = fom.ops();
  const TimeGrid& grid = fom.grid();
  const std::vector<ParameterVector>& train = cfg.training;
  auto log = [&](const std::string& msg) {
    if (cfg.verbose) std::cerr << "[greedy] " << msg << '\n';
  };

  // Training trajectories, solved once and reused for every calibration.
  std::vector<std::unique_ptr<StateTrajectory>> cache(train.size());
  auto fill_cache = [&] {
    parallel_for(train.size(), [&](std::size_t i) {
      if (!cache[i]) cache[i] = std::make_unique<StateTrajectory>(fom.solve(train[i]));
    });
  };
  auto snapshots_at = [&](const ParameterVector& mu) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train[i] == mu && cache[i]) {
        SnapshotSet s{mu, *cache[i], fom.sensitivities(mu, *cache[i])};
        return s;
      }
    }
    return take_snapshots(fom, mu);
  };

  HierarchicalSpaces hs(ops);
  ParameterVector mu_hat = cfg.initial_mu.value_or(fom.problem().box.center());
  hs.initialize(snapshots_at(mu_hat), cfg.primary_rule, cfg.enlarged_dim);
  ReducedModel model = fom.reduce(hs.bases(), hs.build_deim(cfg.deim_tol));
  log("initial spaces at " + to_string(mu_hat) + ": l=(" + std::to_string(hs.ly()) + "," +
      std::to_string(hs.lq()) + ")");

  fill_cache();
  std::vector<const StateTrajectory*> fom_ptrs(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) fom_ptrs[i] = cache[i].get();

  auto calibrate_and_saturate = [&]() {
    EstimatorCalibration cal = estimate_sigmas(train, fom_ptrs, model, ops, grid, fom.newton());
    for (int round = 0; !cal.saturated(); ++round) {
      if (round >= cfg.max_saturation_rounds)
        throw SaturationFailure("saturation could not be enforced after " +
                                std::to_string(round) + " rounds (sigma_y=" +
                                std::to_string(cal.sigma_y) + ", sigma_q=" +
                                std::to_string(cal.sigma_q) + ")");
      if (cal.sigma_y >= 1.0) {
        const SnapshotSet s = snapshots_at(train[cal.argmax_y]);
        hs.add_pool(s);
        hs.add_f_snapshots(s.f_v0());
        hs.enrich_extra_y(s.y_pool(), cfg.saturation_increment);
      }
      if (cal.sigma_q >= 1.0) {
        const SnapshotSet s = snapshots_at(train[cal.argmax_q]);
        hs.add_pool(s);
        hs.add_f_snapshots(s.f_v0());
        hs.enrich_extra_q(s.q_pool(), cfg.saturation_increment);
      }
      model = fom.reduce(hs.bases(), hs.build_deim(cfg.deim_tol));
      cal = estimate_sigmas(train, fom_ptrs, model, ops, grid, fom.newton());
      log("saturation round " + std::to_string(round + 1) + ": lf=" + std::to_string(model.deim.size()) + " sigma=(" +
          std::to_string(cal.sigma_y) + "," + std::to_string(cal.sigma_q) + ")");
    }
    return cal;
  };

  GreedyResult res;
  EstimatorCalibration cal = calibrate_and_saturate();
  std::vector<EstimatorReport> reports = error_indicator(train, model, cal, grid, fom.newton());
  std::size_t best = argmax_indicator(reports, train);
  double e_hat = reports[best].indicator;

  auto record = [&](int it, const ParameterVector& mu) {
    GreedyIteration h;
    h.iteration = it;
    h.mu = mu;
    h.e_hat = e_hat;
    h.ly = hs.ly();
    h.lq = hs.lq();
    h.my = model.bases.my();
    h.mq = model.bases.mq();
    h.lf = model.deim.size();
    h.sigma_y = cal.sigma_y;
    h.sigma_q = cal.sigma_q;
    res.history.push_back(h);
    std::ostringstream os;
    os << "iteration " << it << ": e_hat=" << e_hat << " at " << to_string(train[best])
       << " l=(" << h.ly << "," << h.lq << ") m=(" << h.my << "," << h.mq << ") lf=" << h.lf
       << " sigma=(" << h.sigma_y << "," << h.sigma_q << ")";
    log(os.str());
  };
  record(0, mu_hat);

  for (int it = 1; e_hat > cfg.tol && hs.ly() + hs.lq() < cfg.max_basis; ++it) {
    mu_hat = train[best];
    EstimatorReport rep = reports[best];
    const SnapshotSet snap = snapshots_at(mu_hat);
    hs.add_pool(snap);
    hs.add_f_snapshots(snap.f_v0());
    const Matrix cand_y = rep.delta_l.y > cfg.tol ? hs.primary_candidates_y(snap.traj.y, cfg.primary_rule)
                                                  : Matrix(ops.dim_y(), 0);
    const Matrix cand_q = rep.delta_l.q > cfg.tol ? hs.primary_candidates_q(snap.traj.q, cfg.primary_rule)
                                                  : Matrix(ops.dim_q(), 0);
    Eigen::Index iy = 0, iq = 0;
    bool need_y = cand_y.cols() > 0, need_q = cand_q.cols() > 0;
    while ((need_y || need_q) && hs.ly() + hs.lq() < cfg.max_basis) {
      if (need_y) hs.append_primary_y(cand_y.col(iy++));
      if (need_q && hs.ly() + hs.lq() < cfg.max_basis) hs.append_primary_q(cand_q.col(iq++));
      model = fom.reduce(hs.bases(), hs.build_deim(cfg.deim_tol));
      rep = estimate(mu_hat, model, model.small(), cal, grid, fom.newton());
      need_y = need_y && rep.delta_l.y > cfg.tol && iy < cand_y.cols();
      need_q = need_q && rep.delta_l.q > cfg.tol && iq < cand_q.cols();
    }
    model = fom.reduce(hs.bases(), hs.build_deim(cfg.deim_tol));
    cal = calibrate_and_saturate();
    reports = error_indicator(train, model, cal, grid, fom.newton());
    best = argmax_indicator(reports, train);
    e_hat = reports[best].indicator;
    record(it, mu_hat);
  }

  res.model = std::move(model);
  res.f_compressed = hs.compressed_f();
  res.calibration = cal;
  res.e_hat = e_hat;
  res.converged = e_hat <= cfg.tol;
  res.cap_reached = hs.ly() + hs.lq() >= cfg.max_basis;
  res.fom_solves = fom.solve_count() - solves0;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace hrb
