// Runs every acceptance criterion at its pinned tolerance and prints one line per criterion.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hrb/io.hpp"

using namespace hrb;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ExperimentConfig greedy_config(const std::string& input) {
  return parse_config({{"problem", {{"final_time", 1.0}, {"input", {{"name", input}}}}},
                       {"greedy", {{"tol", 1e-4}, {"max_basis", 50}, {"grid_points", 5}, {"test_count", 100}}},
                       {"seed", 1}});
}

ExperimentConfig optim_config(const json& input, const ParameterVector& mu_star) {
  return parse_config({{"problem", {{"final_time", 2.0}, {"input", input}}},
                       {"optim",
                        {{"alpha_j", 1e5},
                         {"lambda", 1e-7},
                         {"mu0", {3, 3, 3, 3}},
                         {"mu_ref", {3, 3, 3, 3}},
                         {"mu_star", {mu_star[0], mu_star[1], mu_star[2], mu_star[3]}},
                         {"noise_variance", 1e-3},
                         {"tol", 1e-5}}},
                       {"seed", 1}});
}

const json kStep3 = {{"name", "step3"}};
const json kSinusoid = {{"type", "sinusoid"}, {"a", 0.5}, {"w1", 10}, {"b", 0.4}, {"w2", 20}};

struct GreedyRun {
  std::string input;
  GreedyResult result;
  std::vector<TestSample> samples;
};

std::vector<GreedyRun> run_greedies() {
  std::vector<GreedyRun> runs;
  for (const std::string input : {"u1", "u2", "u3"}) {
    const ExperimentConfig cfg = greedy_config(input);
    const auto fom = make_fom(cfg);
    GreedyRun r{input, run_weak_greedy(make_greedy_config(cfg, fom->problem().box), *fom), {}};
    r.samples = test_sweep(random_parameters(fom->problem().box, 100, cfg.seed), r.result, *fom);
    runs.push_back(std::move(r));
  }
  return runs;
}

Outcome criterion1(const std::vector<GreedyRun>& runs) {
  Outcome o;
  for (const GreedyRun& r : runs) {
    FieldPair emax;
    for (const TestSample& t : r.samples) {
      emax.y = std::max(emax.y, t.error.y);
      emax.q = std::max(emax.q, t.error.q);
    }
    const int l = r.result.model.bases.ly + r.result.model.bases.lq;
    o.detail << " " << r.input << ": e_hat=" << sci(r.result.e_hat) << " l=(" << r.result.model.bases.ly
             << "," << r.result.model.bases.lq << ") maxE=(" << sci(emax.y) << "," << sci(emax.q) << ");";
    o.require(r.result.converged && r.result.e_hat <= 1e-4, r.input + " e_hat <= 1e-4");
    o.require(emax.y <= 1e-4 && emax.q <= 1e-4, r.input + " max test error <= 1e-4");
    o.require(l <= 16, r.input + " l_y + l_q <= 16");
  }
  return o;
}

Outcome criterion2(const std::vector<GreedyRun>& runs) {
  Outcome o;
  const double slack = 1e-10;
  for (const GreedyRun& r : runs) {
    const EstimatorCalibration& cal = r.result.calibration;
    int used_y = 0, used_q = 0, bad = 0;
    double eta_min = INFINITY, eta_max = 0.0;
    auto check = [&](double dlm, double e, double sigma, const char* field) {
      const double eta = dlm / std::sqrt(1.0 - sigma) / e;
      eta_min = std::min(eta_min, eta);
      eta_max = std::max(eta_max, eta);
      const bool lower = dlm / std::sqrt(1.0 + sigma) <= e + slack;
      const bool upper = e <= dlm / std::sqrt(1.0 - sigma) + slack;
      const bool eff = eta >= 1.0 - slack && eta <= std::sqrt((1 + sigma) / (1 - sigma)) + slack;
      if (!(lower && upper && eff)) {
        ++bad;
        o.require(false, r.input + " " + field + " eta=" + sci(eta));
      }
    };
    for (const TestSample& t : r.samples) {
      if (!cal.saturated()) break;
      if (t.saturated_y(cal.sigma_y) && t.error.y > 0) ++used_y, check(t.report.delta_lm.y, t.error.y, cal.sigma_y, "y");
      if (t.saturated_q(cal.sigma_q) && t.error.q > 0) ++used_q, check(t.report.delta_lm.q, t.error.q, cal.sigma_q, "q");
    }
    o.require(cal.saturated(), r.input + " calibrated sigma < 1");
    o.detail << " " << r.input << ": sigma=(" << sci(cal.sigma_y) << "," << sci(cal.sigma_q)
             << ") eta_bar=(" << sci(cal.eta_bar_y()) << "," << sci(cal.eta_bar_q()) << ") eta in ["
             << sci(eta_min) << "," << sci(eta_max) << "] over " << used_y << "+" << used_q
             << " samples, " << bad << " violations;";
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const ExperimentConfig cfg = optim_config(kStep3, ParameterVector(2, 3, 4, 5));
  const auto fom = make_fom(cfg);
  GreedyResult g = run_weak_greedy(make_greedy_config(cfg, fom->problem().box), *fom);
  const MeasurementData data = generate_data(*fom, cfg.optim.mu_star, cfg.optim.noise_variance, cfg.seed);
  attach_cost(g.model, fom->ops(), data.w);
  const CostConfig cost = make_cost_config(cfg);
  const Surrogate s(g.model, g.calibration.sigma_q, cost, fom->problem(), fom->grid(), fom->newton());
  int bad = 0;
  double worst = 0.0;
  const auto params = random_parameters(fom->problem().box, 20, cfg.seed);
  for (const ParameterVector& mu : params) {
    const double jh = cost_fom(mu, fom->solve(mu), data, cost, fom->ops()).j;
    const SurrogatePoint p = s.evaluate(mu, false);
    const double ratio = std::abs(jh - p.j) / p.delta_j;
    worst = std::max(worst, ratio);
    if (!(std::abs(jh - p.j) <= p.delta_j)) ++bad;
  }
  o.detail << " model l=(" << g.model.bases.ly << "," << g.model.bases.lq << ") sigma_q=" << sci(g.calibration.sigma_q)
           << "; max |J_h - J_l| / Delta_J = " << sci(worst) << " over " << params.size() << " parameters";
  o.require(bad == 0, std::to_string(bad) + " parameters with |J_h - J_l| > Delta_J");
  return o;
}

struct Pair {
  OptimResult fo, tr;
};

Pair optimize(const ExperimentConfig& cfg) {
  const auto fom = make_fom(cfg);
  const MeasurementData data = generate_data(*fom, cfg.optim.mu_star, cfg.optim.noise_variance, cfg.seed);
  const CostConfig cost = make_cost_config(cfg);
  FoConfig fo;
  fo.tol = cfg.optim.tol;
  TrConfig tr;
  tr.tol = cfg.optim.tol;
  return {run_fo_reference(*fom, data, cost, cfg.optim.mu0, fo), run_tr_rb(*fom, data, cost, cfg.optim.mu0, tr)};
}

std::string describe(const char* name, const OptimResult& r) {
  std::ostringstream os;
  os << " " << name << ": mu=" << to_string(r.mu_opt) << " e_rel=" << sci(*r.e_rel) << " it=" << r.iterations
     << " fom=" << r.fom_solves << " pg=" << sci(r.pg_norm) << ";";
  return os.str();
}

Outcome criterion4() {
  Outcome o;
  const Pair a = optimize(optim_config(kStep3, ParameterVector(2, 3, 4, 5)));
  o.detail << describe("FO", a.fo) << describe("TR-RB", a.tr);
  o.require(*a.fo.e_rel <= 0.01, "FO e_rel <= 0.01");
  o.require(*a.tr.e_rel <= 0.01, "TR-RB e_rel <= 0.01");
  o.require(a.tr.iterations <= 10, "TR-RB iterations <= 10");
  o.require(a.tr.fom_solves <= 12, "TR-RB FOM solves <= 12");
  o.require(a.tr.fom_solves < a.fo.fom_solves, "TR-RB FOM solves < FO");
  const Pair b = optimize(optim_config(kStep3, ParameterVector(4, 4, 2, 1.5)));
  o.detail << " variant" << describe("FO", b.fo) << describe("TR-RB", b.tr);
  o.require(*b.fo.e_rel <= 0.005, "variant FO e_rel <= 0.005");
  o.require(*b.tr.e_rel <= 0.005, "variant TR-RB e_rel <= 0.005");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const ExperimentConfig cfg = optim_config(kSinusoid, ParameterVector(2, 3, 4, 5));
  const Pair a = optimize(cfg);
  o.detail << describe("FO", a.fo) << describe("TR-RB", a.tr);
  for (const auto& [name, r, cap] : {std::tuple{"FO", &a.fo, FoConfig{}.max_iter},
                                     std::tuple{"TR-RB", &a.tr, TrConfig{}.max_iter}}) {
    o.require(*r->e_rel >= 0.05 && *r->e_rel <= 0.3, std::string(name) + " e_rel in [0.05, 0.3]");
    o.require(r->converged || r->iterations >= cap, std::string(name) + " stopping test met");
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const ExperimentConfig cfg = parse_config(
      {{"problem", {{"final_time", 1.0}, {"input", {{"name", "u2"}}}}},
       {"discretization", {{"n_cells", 40}, {"order", 1}, {"time_nodes", 51}}}});
  const auto fom = make_fom(cfg);
  const AssembledOperators& ops = fom->ops();
  const TimeGrid& grid = fom->grid();
  const ParameterBox& box = fom->problem().box;
  const auto params = random_parameters(box, 5, 6);
  auto weighted = [&](const Matrix& x, const SymBandMatrix& s) {
    double acc = 0.0;
    for (int k = 0; k < grid.size(); ++k) acc += grid.weight(k) * s.quadratic_form(x.col(k));
    return acc;
  };

  // (a) Full-rank POD and DEIM.
  {
    Matrix ys(ops.dim_y(), 0), qs(ops.dim_q(), 0), fs(ops.dim_q(), 0);
    auto append = [](Matrix& a, const Matrix& b) {
      a.conservativeResize(Eigen::NoChange, a.cols() + b.cols());
      a.rightCols(b.cols()) = b;
    };
    for (const ParameterVector& mu : box.uniform_grid(2)) {
      const SnapshotSet s = take_snapshots(*fom, mu);
      append(ys, s.y_pool());
      append(qs, s.q_pool());
      append(fs, s.f_v0());
    }
    NestedBases b;
    b.y = pod(ys, ops.gram_y, PodRule::energy(0.0)).basis;
    b.q = pod(qs, ops.gram_q, PodRule::energy(0.0)).basis;
    b.ly = b.my();
    b.lq = b.mq();
    const int lf = pod(fs, PodRule::energy(0.0)).numerical_rank;
    const ReducedModel rm = fom->reduce(b, deim_build(fs, lf));
    double err = 0.0;
    for (const ParameterVector& mu : params) {
      const StateTrajectory h = fom->solve(mu);
      const RomTrajectory r = solve_rom(mu, rm.big, grid, fom->newton());
      err = std::max({err, (lift_y(rm.bases, r.y) - h.y).cwiseAbs().maxCoeff(),
                      (lift_q(rm.bases, r.q) - h.q).cwiseAbs().maxCoeff()});
    }
    o.detail << " (a) dims=(" << b.ly << "," << b.lq << "," << lf << ") max|x_h - x_l|=" << sci(err) << ";";
    o.require(err <= 1e-8, "(a) full-rank reduced model equals FOM to 1e-8");
  }

  // Nested model for (b) and (c).
  GreedyConfig gc;
  gc.tol = 1e-3;
  gc.training = box.uniform_grid(2);
  GreedyResult g = run_weak_greedy(gc, *fom);
  const MeasurementData data = generate_data(*fom, ParameterVector(2, 3, 4, 5), 1e-3, 1);
  attach_cost(g.model, ops, data.w);
  const RomOperators small = g.model.small();
  const CostConfig cost;

  double eb = 0.0, ec = 0.0;
  for (const ParameterVector& mu : params) {
    const RomTrajectory rs = solve_rom(mu, small, grid, fom->newton());
    const RomTrajectory rb = solve_rom(mu, g.model.big, grid, fom->newton());
    const FieldPair online = delta_lm(rs, rb, g.model.big, grid);
    const double ry = std::sqrt(weighted(lift_y(g.model.bases, rb.y) - lift_y(g.model.bases, rs.y), ops.gram_y));
    const double rq = std::sqrt(weighted(lift_q(g.model.bases, rb.q) - lift_q(g.model.bases, rs.q), ops.gram_q));
    eb = std::max({eb, std::abs(online.y - ry), std::abs(online.q - rq)});

    const double j_online = cost_rom(mu, rs, small, cost, grid).j;
    const Matrix diff = lift_q(g.model.bases, rs.q) - data.w;
    const double j_lifted =
        0.5 * cost.alpha_j * weighted(diff, ops.mass_q) + 0.5 * cost.lambda * (mu - cost.mu_ref).squaredNorm();
    ec = std::max(ec, std::abs(j_online - j_lifted));
  }
  o.detail << " (b) max|online - lifted Delta|=" << sci(eb) << "; (c) max|online - lifted J|=" << sci(ec) << ";";
  o.require(eb <= 1e-10, "(b) online estimate equals full-space recomputation to 1e-10");
  o.require(ec <= 1e-10, "(c) online cost equals lifted evaluation to 1e-10");

  // (d) Sensitivity gradient against central differences.
  double ed = 0.0;
  for (const ParameterVector& mu : params) {
    const StateTrajectory h = fom->solve(mu);
    const ParameterVector gs = grad_fom(mu, h, fom->sensitivities(mu, h), data, cost, ops);
    ParameterVector fd;
    for (int i = 0; i < 4; ++i) {
      const double step = 1e-5 * mu[i];
      ParameterVector p = mu, m = mu;
      p[i] += step;
      m[i] -= step;
      fd[i] = (cost_fom(p, fom->solve(p), data, cost, ops).j - cost_fom(m, fom->solve(m), data, cost, ops).j) /
              (2 * step);
    }
    ed = std::max(ed, (gs - fd).norm() / fd.norm());
  }
  o.detail << " (d) max relative gradient error=" << sci(ed);
  o.require(ed <= 1e-5, "(d) gradient matches central differences to 1e-5");
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (int order : {1, 2}) {
    const ExperimentConfig cfg = parse_config(
        {{"problem", {{"y_init", 5.0}, {"input", {{"type", "constant"}, {"value", 0.0}}}}},
         {"discretization", {{"n_cells", order == 1 ? 200 : 100}, {"order", order}, {"time_nodes", 201}}}});
    const auto fom = make_fom(cfg);
    double dy = 0.0, dq = 0.0;
    const auto params = fom->problem().box.uniform_grid(3);
    for (const ParameterVector& mu : params) {
      const StateTrajectory h = fom->solve(mu);
      dy = std::max(dy, (h.y.array() - 5.0).abs().maxCoeff());
      dq = std::max(dq, h.q.cwiseAbs().maxCoeff());
    }
    o.detail << " P" << order << ": max|y - 5|=" << sci(dy) << " max|q|=" << sci(dq) << " over " << params.size()
             << " parameters;";
    o.require(dy <= 1e-10 && dq <= 1e-10, "P" + std::to_string(order) + " stationary to 1e-10");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::string> names{"",
                                       "greedy certification",
                                       "estimator sandwich",
                                       "cost-bound validity",
                                       "parameter recovery",
                                       "identifiability negative control",
                                       "oracle equivalences",
                                       "exact stationary solution"};
  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [error: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " (" << names[id] << "): " << (o.pass ? "PASS" : "FAIL") << " |"
              << o.detail.str() << " (" << sci(secs) << " s)" << std::endl;
  };

  std::vector<GreedyRun> runs;
  report(1, [&] {
    runs = run_greedies();
    return criterion1(runs);
  });
  report(2, [&] {
    if (runs.empty()) throw std::runtime_error("greedy runs unavailable");
    return criterion2(runs);
  });
  report(3, criterion3);
  report(4, criterion4);
  report(5, criterion5);
  report(6, criterion6);
  report(7, criterion7);
  std::cout << (7 - failures) << "/7 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
