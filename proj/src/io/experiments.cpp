#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>

#include "hrb/io.hpp"

namespace hrb {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> mu_fields(const ParameterVector& mu) {
  return {CsvWriter::num(mu[0]), CsvWriter::num(mu[1]), CsvWriter::num(mu[2]), CsvWriter::num(mu[3])};
}

std::string opt_num(const std::optional<double>& v) { return v ? CsvWriter::num(*v) : ""; }

CsvWriter trace_csv(const OptimResult& r) {
  CsvWriter csv({"iteration", "mu1", "mu2", "mu3", "mu4", "j_rom", "delta_j", "j_fom", "radius",
                 "accepted", "fom_solves", "ly", "lq", "pg_norm"});
  for (const OptimStep& s : r.trace) {
    std::vector<std::string> row{CsvWriter::num(s.iteration)};
    for (const std::string& f : mu_fields(s.mu)) row.push_back(f);
    row.insert(row.end(), {CsvWriter::num(s.j_rom), CsvWriter::num(s.delta_j), CsvWriter::num(s.j_fom),
                           CsvWriter::num(s.radius), s.accepted ? "1" : "0",
                           CsvWriter::num(s.fom_solves), CsvWriter::num(s.ly), CsvWriter::num(s.lq),
                           CsvWriter::num(s.pg_norm)});
    csv.row(row);
  }
  return csv;
}

}  // namespace

std::unique_ptr<FullOrderModel> make_fom(const ExperimentConfig& cfg) {
  return std::make_unique<FullOrderModel>(make_problem(cfg), cfg.disc.n_cells, cfg.disc.order,
                                          cfg.disc.time_nodes, cfg.newton);
}

GreedyConfig make_greedy_config(const ExperimentConfig& cfg, const ParameterBox& box) {
  GreedyConfig g;
  g.tol = cfg.greedy.tol;
  g.max_basis = cfg.greedy.max_basis;
  g.training = box.uniform_grid(cfg.greedy.grid_points);
  g.enlarged_dim = cfg.greedy.enlarged_dim;
  g.verbose = cfg.verbose;
  return g;
}

CostConfig make_cost_config(const ExperimentConfig& cfg) {
  CostConfig c;
  c.alpha_j = cfg.optim.alpha_j;
  c.lambda = cfg.optim.lambda;
  c.mu_ref = cfg.optim.mu_ref;
  return c;
}

std::vector<ParameterVector> random_parameters(const ParameterBox& box, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ParameterVector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    ParameterVector mu;
    for (int j = 0; j < 4; ++j)
      mu[j] = std::uniform_real_distribution<double>(box.lower[j], box.upper[j])(rng);
    out.push_back(mu);
  }
  return out;
}

std::vector<TestSample> test_sweep(const std::vector<ParameterVector>& params, const GreedyResult& res,
                                   const FullOrderModel& fom) {
  const RomOperators small = res.model.small();
  std::vector<TestSample> out;
  for (const ParameterVector& mu : params) {
    TestSample t;
    t.mu = mu;
    auto t0 = std::chrono::steady_clock::now();
    const StateTrajectory h = fom.solve(mu);
    t.fe_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const RomTrajectory rs = solve_rom(mu, small, fom.grid(), fom.newton());
    t.rb_seconds = seconds_since(t0);
    const RomTrajectory rb = solve_rom(mu, res.model.big, fom.grid(), fom.newton());
    t.error = true_error(h, rs, res.model.bases, fom.ops());
    t.error_big = true_error(h, rb, res.model.bases, fom.ops());
    const FieldPair lm = delta_lm(rs, rb, res.model.big, fom.grid());
    t.report.delta_lm = lm;
    if (res.calibration.saturated()) {
      t.report.delta_l = {delta_l(lm.y, res.calibration.sigma_y), delta_l(lm.q, res.calibration.sigma_q)};
      t.report.indicator = 0.5 * (t.report.delta_l.y + t.report.delta_l.q);
    }
    out.push_back(t);
  }
  return out;
}

GreedyTable cmd_greedy(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto fom = make_fom(cfg);
  const ParameterBox& box = fom->problem().box;

  GreedyTable table;
  table.result = run_weak_greedy(make_greedy_config(cfg, box), *fom);
  const GreedyResult& res = table.result;
  const EstimatorCalibration& cal = res.calibration;

  table.test_count = cfg.greedy.test_count;
  table.samples = test_sweep(random_parameters(box, cfg.greedy.test_count, cfg.seed), res, *fom);
  table.max_efficiency = {0.0, 0.0};
  table.min_efficiency = {0.0, 0.0};
  bool first_y = true, first_q = true;
  for (const TestSample& t : table.samples) {
    table.avg_fe_seconds += t.fe_seconds / static_cast<double>(table.samples.size());
    table.avg_rb_seconds += t.rb_seconds / static_cast<double>(table.samples.size());
    table.max_error.y = std::max(table.max_error.y, t.error.y);
    table.max_error.q = std::max(table.max_error.q, t.error.q);
    const bool sy = t.saturated_y(cal.sigma_y), sq = t.saturated_q(cal.sigma_q);
    if (sy && sq) ++table.saturated_count;
    if (!cal.saturated()) continue;
    if (sy) {
      const double e = efficiency(t.report.delta_l.y, t.error.y).value;
      table.max_efficiency.y = first_y ? e : std::max(table.max_efficiency.y, e);
      table.min_efficiency.y = first_y ? e : std::min(table.min_efficiency.y, e);
      first_y = false;
    }
    if (sq) {
      const double e = efficiency(t.report.delta_l.q, t.error.q).value;
      table.max_efficiency.q = first_q ? e : std::max(table.max_efficiency.q, e);
      table.min_efficiency.q = first_q ? e : std::min(table.min_efficiency.q, e);
      first_q = false;
    }
  }

  CsvWriter t1({"quantity", "y", "q"});
  auto pair_row = [&](const std::string& name, double y, double q) {
    t1.row({name, CsvWriter::num(y), CsvWriter::num(q)});
  };
  pair_row("basis_l", res.model.bases.ly, res.model.bases.lq);
  pair_row("basis_m", res.model.bases.my(), res.model.bases.mq());
  t1.row({"deim_size", CsvWriter::num(res.model.deim.size()), ""});
  pair_row("sigma", cal.sigma_y, cal.sigma_q);
  if (cal.saturated()) pair_row("eta_bar", cal.eta_bar_y(), cal.eta_bar_q());
  t1.row({"greedy_iterations", CsvWriter::num(static_cast<int>(res.history.size())), ""});
  t1.row({"e_hat", CsvWriter::num(res.e_hat), ""});
  t1.row({"converged", res.converged ? "1" : "0", ""});
  t1.row({"fom_solves", CsvWriter::num(res.fom_solves), ""});
  t1.row({"greedy_time_s", CsvWriter::num(res.seconds), ""});
  if (!table.samples.empty()) {
    t1.row({"test_count", CsvWriter::num(table.test_count), ""});
    t1.row({"avg_time_fe_s", CsvWriter::num(table.avg_fe_seconds), ""});
    t1.row({"avg_time_rb_s", CsvWriter::num(table.avg_rb_seconds), ""});
    pair_row("max_test_error", table.max_error.y, table.max_error.q);
    pair_row("max_efficiency", table.max_efficiency.y, table.max_efficiency.q);
    pair_row("min_efficiency", table.min_efficiency.y, table.min_efficiency.q);
    t1.row({"saturated_tests", CsvWriter::num(table.saturated_count), ""});
  }
  t1.save(out_dir / "greedy_table.csv");

  CsvWriter hist({"iteration", "mu1", "mu2", "mu3", "mu4", "e_hat", "ly", "lq", "my", "mq", "lf",
                  "sigma_y", "sigma_q"});
  for (const GreedyIteration& it : res.history) {
    std::vector<std::string> row{CsvWriter::num(it.iteration)};
    for (const std::string& f : mu_fields(it.mu)) row.push_back(f);
    row.insert(row.end(), {CsvWriter::num(it.e_hat), CsvWriter::num(it.ly), CsvWriter::num(it.lq),
                           CsvWriter::num(it.my), CsvWriter::num(it.mq), CsvWriter::num(it.lf),
                           CsvWriter::num(it.sigma_y), CsvWriter::num(it.sigma_q)});
    hist.row(row);
  }
  hist.save(out_dir / "greedy_history.csv");

  if (!table.samples.empty()) {
    CsvWriter tests({"mu1", "mu2", "mu3", "mu4", "error_y", "error_q", "error_big_y", "error_big_q",
                     "delta_lm_y", "delta_lm_q", "delta_l_y", "delta_l_q"});
    for (const TestSample& t : table.samples) {
      std::vector<std::string> row = mu_fields(t.mu);
      for (double v : {t.error.y, t.error.q, t.error_big.y, t.error_big.q, t.report.delta_lm.y,
                       t.report.delta_lm.q, t.report.delta_l.y, t.report.delta_l.q})
        row.push_back(CsvWriter::num(v));
      tests.row(row);
    }
    tests.save(out_dir / "greedy_tests.csv");
  }

  if (cfg.output.svg) {
    PlotSeries e{"max indicator", {}, {}}, ly{"l_y", {}, {}}, lq{"l_q", {}, {}};
    for (const GreedyIteration& it : res.history) {
      e.x.push_back(it.iteration);
      e.y.push_back(it.e_hat);
      ly.x.push_back(it.iteration);
      ly.y.push_back(it.ly);
      lq.x.push_back(it.iteration);
      lq.y.push_back(it.lq);
    }
    write_text(out_dir / "greedy_convergence.svg",
               svg_line_plot({e}, {"Greedy error indicator", "iteration", "indicator", true}));
    write_text(out_dir / "greedy_basis.svg",
               svg_line_plot({ly, lq}, {"Basis dimensions", "iteration", "dimension", false}));
  }

  pack_greedy(res, cfg.hash()).save(out_dir / "greedy_model.hrb");
  return table;
}

OptimizeReport cmd_optimize(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto fom = make_fom(cfg);
  const CostConfig cost = make_cost_config(cfg);
  const MeasurementData data =
      generate_data(*fom, cfg.optim.mu_star, cfg.optim.noise_variance, cfg.seed);

  std::optional<GreedyResult> initial;
  if (!cfg.optim.initial_model.empty())
    initial = unpack_greedy(ArtifactContainer::load(cfg.optim.initial_model, cfg.hash()), *fom);

  OptimizeReport rep;
  if (cfg.optim.run_reference) {
    FoConfig fo;
    fo.tol = cfg.optim.tol;
    fo.verbose = cfg.verbose;
    rep.reference = run_fo_reference(*fom, data, cost, cfg.optim.mu0, fo);
  }
  TrConfig tr;
  tr.radius0 = cfg.optim.radius0;
  tr.tol = cfg.optim.tol;
  tr.max_iter = cfg.optim.max_iter;
  tr.enlarged_dim = cfg.greedy.enlarged_dim;
  tr.initial = initial ? &*initial : nullptr;
  tr.verbose = cfg.verbose;
  rep.tr_rb = run_tr_rb(*fom, data, cost, cfg.optim.mu0, tr);

  CsvWriter summary({"method", "time_s", "iterations", "fom_evaluations", "e_abs", "e_rel", "mu1",
                     "mu2", "mu3", "mu4", "cost", "pg_norm", "converged"});
  auto add = [&](const std::string& name, const OptimResult& r) {
    std::vector<std::string> row{name, CsvWriter::num(r.seconds), CsvWriter::num(r.iterations),
                                 CsvWriter::num(r.fom_solves), opt_num(r.e_abs), opt_num(r.e_rel)};
    for (const std::string& f : mu_fields(r.mu_opt)) row.push_back(f);
    row.insert(row.end(), {CsvWriter::num(r.cost), CsvWriter::num(r.pg_norm), r.converged ? "1" : "0"});
    summary.row(row);
  };
  if (rep.reference) add("FO", *rep.reference);
  add("TR-RB", rep.tr_rb);
  summary.save(out_dir / "optimize_table.csv");
  if (rep.reference) trace_csv(*rep.reference).save(out_dir / "trace_fo.csv");
  trace_csv(rep.tr_rb).save(out_dir / "trace_tr_rb.csv");

  if (cfg.output.svg) {
    const StateTrajectory star = fom->solve(cfg.optim.mu_star);
    const int last = fom->grid().size() - 1;
    const std::vector<double> x = fom->space().nodes();
    std::vector<PlotSeries> fields;
    auto field = [&](const std::string& name, const OptimResult& r) {
      const StateTrajectory h = fom->solve(r.mu_opt);
      PlotSeries s{name, {}, {}};
      for (Eigen::Index i = 0; i < h.q.rows(); ++i) {
        s.x.push_back(x[static_cast<std::size_t>(i) + 1]);
        s.y.push_back(std::abs(h.q(i, last) - star.q(i, last)));
      }
      fields.push_back(s);
    };
    if (rep.reference) field("FO", *rep.reference);
    field("TR-RB", rep.tr_rb);
    write_text(out_dir / "optimize_error_field.svg",
               svg_line_plot(fields, {"|q(mu_opt) - q(mu*)| at final time", "x", "error", true}));
    std::vector<PlotSeries> pg;
    auto conv = [&](const std::string& name, const OptimResult& r) {
      PlotSeries s{name, {}, {}};
      for (const OptimStep& st : r.trace) {
        s.x.push_back(st.iteration);
        s.y.push_back(st.pg_norm);
      }
      pg.push_back(s);
    };
    if (rep.reference) conv("FO", *rep.reference);
    conv("TR-RB", rep.tr_rb);
    write_text(out_dir / "optimize_convergence.svg",
               svg_line_plot(pg, {"Projected gradient", "iteration", "norm", true}));
  }
  return rep;
}

void cmd_solve(const ExperimentConfig& cfg, const ParameterVector& mu, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto fom = make_fom(cfg);
  if (!fom->problem().box.contains(mu))
    throw std::invalid_argument("solve: parameter " + to_string(mu) + " is outside the box");
  const StateTrajectory h = fom->solve(mu);
  const TimeGrid& grid = fom->grid();
  const std::vector<double> x = fom->space().nodes();

  auto dump = [&](const Matrix& states, int first_node, const fs::path& path) {
    std::vector<std::string> header{"x"};
    for (int k = 0; k < grid.size(); ++k) header.push_back("t=" + CsvWriter::num(grid.time(k)));
    CsvWriter csv(header);
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      std::vector<std::string> row{CsvWriter::num(x[static_cast<std::size_t>(i + first_node)])};
      for (int k = 0; k < grid.size(); ++k) row.push_back(CsvWriter::num(states(i, k)));
      csv.row(row);
    }
    csv.save(path);
  };
  dump(h.y, 0, out_dir / "solve_y.csv");
  dump(h.q, 1, out_dir / "solve_q.csv");

  CsvWriter summary({"quantity", "value"});
  summary.row({"min_y", CsvWriter::num(h.min_y)});
  summary.row({"max_y", CsvWriter::num(h.max_y)});
  if (!cfg.optim.initial_model.empty()) {
    const GreedyResult g = unpack_greedy(ArtifactContainer::load(cfg.optim.initial_model, cfg.hash()), *fom);
    const RomTrajectory rs = solve_rom(mu, g.model.small(), grid, fom->newton());
    const FieldPair e = true_error(h, rs, g.model.bases, fom->ops());
    summary.row({"rom_error_y", CsvWriter::num(e.y)});
    summary.row({"rom_error_q", CsvWriter::num(e.q)});
    dump(lift_q(g.model.bases, rs.q), 1, out_dir / "solve_rom_q.csv");
  }
  summary.save(out_dir / "solve_summary.csv");
}

}  // namespace hrb
