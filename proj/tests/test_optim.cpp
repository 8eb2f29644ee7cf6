#include <doctest.h>

#include <cmath>
#include <random>

#include "hrb/optim.hpp"
#include "support.hpp"

using namespace hrb;

namespace {

const FullOrderModel& small_fom() {
  static const FullOrderModel fom(test::small_problem(InputSignal::step(-3.0, 3.0, 0.5)), 20, 1, 21);
  return fom;
}

const std::vector<ParameterVector> kTraining{ParameterVector(1, 5, 1, 5), ParameterVector(5, 1, 5, 1),
                                             ParameterVector(2, 3, 4, 2), ParameterVector(4, 4, 2, 3),
                                             ParameterVector(2, 3, 4, 5)};

ParameterVector fd_gradient(const std::function<double(const ParameterVector&)>& f, const ParameterVector& mu,
                            double h) {
  ParameterVector g;
  for (int i = 0; i < 4; ++i) {
    ParameterVector p = mu, m = mu;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("synthetic data: exact without noise, deterministic with a seed") {
  const FullOrderModel& fom = small_fom();
  const ParameterVector star(2, 3, 4, 5);
  const MeasurementData exact = generate_data(fom, star, 0.0, 7);
  CHECK((exact.w - fom.solve(star).q).norm() == 0.0);
  const MeasurementData a = generate_data(fom, star, 1e-3, 7), b = generate_data(fom, star, 1e-3, 7),
                        c = generate_data(fom, star, 1e-3, 8);
  CHECK((a.w - b.w).norm() == 0.0);
  CHECK((a.w - c.w).norm() > 0.0);
  CHECK(a.mu_star == star);
  CHECK_THROWS_AS(generate_data(fom, ParameterVector(0, 3, 4, 5), 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_data(fom, star, -1.0, 1), std::invalid_argument);
}

TEST_CASE("synthetic noise has the requested variance") {
  const FullOrderModel fom(test::small_problem(), 100, 1, 101);
  const ParameterVector star(2, 3, 4, 5);
  const Matrix noise = generate_data(fom, star, 1e-3, 3).w - generate_data(fom, star, 0.0, 3).w;
  const double mean = noise.mean();
  const double var = (noise.array() - mean).square().sum() / static_cast<double>(noise.size() - 1);
  CHECK(std::abs(var - 1e-3) <= 0.1e-3);
  CHECK(std::abs(mean) <= 4 * std::sqrt(1e-3 / static_cast<double>(noise.size())));
}

TEST_CASE("reduced cost equals the cost of the lifted trajectory") {
  const FullOrderModel& fom = small_fom();
  const MeasurementData data = generate_data(fom, ParameterVector(2, 3, 4, 5), 1e-3, 1);
  ReducedModel rm = test::nested_model(fom, kTraining, 4, 6, 3, 5, 8);
  attach_cost(rm, fom.ops(), data.w);
  const RomOperators small = rm.small();
  const CostConfig cfg;
  std::mt19937_64 rng(61);
  for (int t = 0; t < 5; ++t) {
    const ParameterVector mu = test::random_mu(rng);
    for (const RomOperators* ops : {&small, static_cast<const RomOperators*>(&rm.big)}) {
      const RomTrajectory r = solve_rom(mu, *ops, fom.grid());
      StateTrajectory lifted;
      lifted.grid = fom.grid();
      lifted.q = lift_q(rm.bases, r.q);
      lifted.y = lift_y(rm.bases, r.y);
      const double online = cost_rom(mu, r, *ops, cfg, fom.grid()).j;
      const double offline = cost_fom(mu, lifted, data, cfg, fom.ops()).j;
      CHECK(std::abs(online - offline) <= 1e-10 * std::max(1.0, offline));
    }
  }
}

TEST_CASE("full-order gradient matches central differences") {
  NewtonConfig tight;
  tight.abs_tol = 1e-13;
  const FullOrderModel fom(test::small_problem(InputSignal::step(-3.0, 3.0, 0.5)), 20, 1, 21, tight);
  const MeasurementData data = generate_data(fom, ParameterVector(2, 3, 4, 5), 1e-3, 1);
  const CostConfig cfg;
  auto j = [&](const ParameterVector& mu) { return cost_fom(mu, fom.solve(mu), data, cfg, fom.ops()).j; };
  std::mt19937_64 rng(62);
  for (int t = 0; t < 5; ++t) {
    const ParameterVector mu = test::random_mu(rng);
    const StateTrajectory tr = fom.solve(mu);
    const ParameterVector g = grad_fom(mu, tr, fom.sensitivities(mu, tr), data, cfg, fom.ops());
    const ParameterVector fd = fd_gradient(j, mu, 1e-5);
    CHECK((g - fd).norm() <= 1e-5 * fd.norm());
  }
}

TEST_CASE("reduced gradient matches central differences") {
  const FullOrderModel& fom = small_fom();
  const MeasurementData data = generate_data(fom, ParameterVector(2, 3, 4, 5), 1e-3, 1);
  ReducedModel rm = test::nested_model(fom, kTraining, 5, 6, 4, 5, 10);
  attach_cost(rm, fom.ops(), data.w);
  const RomOperators small = rm.small();
  NewtonConfig tight;
  tight.abs_tol = 1e-13;
  const CostConfig cfg;
  auto j = [&](const ParameterVector& mu) {
    return cost_rom(mu, solve_rom(mu, small, fom.grid(), tight), small, cfg, fom.grid()).j;
  };
  std::mt19937_64 rng(63);
  for (int t = 0; t < 3; ++t) {
    const ParameterVector mu = test::random_mu(rng);
    const RomTrajectory r = solve_rom(mu, small, fom.grid(), tight);
    const ParameterVector g =
        grad_rom(mu, r, solve_rom_sensitivities(mu, small, r, fom.grid()), small, cfg, fom.grid());
    CHECK((g - fd_gradient(j, mu, 1e-5)).norm() <= 1e-5 * g.norm());
  }
}

TEST_CASE("projected gradient") {
  const ParameterBox box;
  CHECK(projected_gradient(ParameterVector::Constant(3), ParameterVector(1, -1, 0, 0.5), box) ==
        ParameterVector(1, -1, 0, 0.5));
  const ParameterVector pg = projected_gradient(ParameterVector(1, 5, 3, 3), ParameterVector(1, -1, 5, -5), box);
  CHECK(pg == ParameterVector(0, 0, 2, -2));
}

TEST_CASE("projected BFGS on quadratic models") {
  const ParameterBox box;
  const Eigen::Matrix4d a = (Eigen::Matrix4d() << 4, 1, 0, 0, 1, 3, 0.5, 0, 0, 0.5, 2, 0, 0, 0, 0, 10).finished();
  auto make = [&](const ParameterVector& c) {
    return [&, c](const ParameterVector& mu) -> std::optional<BfgsPoint> {
      const ParameterVector d = mu - c;
      return BfgsPoint{mu, 0.5 * d.dot(a * d), a * d};
    };
  };
  BfgsOptions opt;
  opt.gtol = 1e-10;

  SUBCASE("interior minimum") {
    const ParameterVector c(2.0, 2.5, 4.0, 1.5);
    auto f = make(c);
    const BfgsOutcome out = projected_bfgs(f, *f(ParameterVector::Constant(3.0)), box, opt);
    CHECK(out.converged);
    CHECK((out.best.mu - c).norm() <= 1e-8);
  }
  SUBCASE("minimum on the boundary") {
    const ParameterVector c(0.0, 3.0, 6.0, 3.0);
    auto f = make(c);
    const BfgsOutcome out = projected_bfgs(f, *f(ParameterVector::Constant(3.0)), box, opt);
    CHECK(out.converged);
    CHECK(out.best.mu[0] == 1.0);
    CHECK(out.best.mu[2] == 5.0);
    CHECK(projected_gradient(out.best.mu, out.best.g, box).norm() <= 1e-10);
  }
  SUBCASE("accept callback stops the run") {
    auto f = make(ParameterVector(2.0, 2.5, 4.0, 1.5));
    int calls = 0;
    const BfgsOutcome out = projected_bfgs(f, *f(ParameterVector::Constant(3.0)), box, opt,
                                           [&](const BfgsPoint&) { return ++calls < 2; });
    CHECK(out.stopped);
    CHECK(calls == 2);
  }
  SUBCASE("rejected evaluations shrink the step") {
    const ParameterVector c(2.0, 2.5, 4.0, 1.5);
    auto base = make(c);
    auto f = [&](const ParameterVector& mu) -> std::optional<BfgsPoint> {
      if ((mu - ParameterVector::Constant(3.0)).norm() > 0.5) return std::nullopt;
      return base(mu);
    };
    const BfgsOutcome out = projected_bfgs(f, *base(ParameterVector::Constant(3.0)), box, opt);
    CHECK((out.best.mu - ParameterVector::Constant(3.0)).norm() <= 0.5);
    CHECK(out.best.f < base(ParameterVector::Constant(3.0))->f);
  }
}

TEST_CASE("AGC point and subproblem respect the trust region") {
  const FullOrderModel& fom = small_fom();
  const MeasurementData data = generate_data(fom, ParameterVector(2, 3, 4, 5), 1e-3, 1);
  ReducedModel rm = test::nested_model(fom, kTraining, 4, 6, 3, 5, 8);
  attach_cost(rm, fom.ops(), data.w);
  const Surrogate s(rm, 0.5, CostConfig{}, fom.problem(), fom.grid(), fom.newton());
  const ParameterBox& box = fom.problem().box;
  const SurrogatePoint start = s.evaluate(ParameterVector::Constant(3.0), true);
  REQUIRE(start.has_grad);
  for (double radius : {0.05, 0.5, 5.0}) {
    const double r = std::max(radius, 1.01 * start.ratio());
    const AgcResult agc = agc_point(s, start, box, r);
    CHECK(agc.point.ratio() <= r);
    CHECK(agc.point.j <= start.j);
    CHECK(box.contains(agc.point.mu));
    if (!agc.stagnated) {
      const SurrogatePoint sub = solve_tr_subproblem(s, agc.point, box, r);
      CHECK(sub.ratio() <= r);
      CHECK(sub.j <= agc.point.j);
      CHECK(box.contains(sub.mu));
    }
  }
  CHECK_THROWS_AS(Surrogate(rm, 1.0, CostConfig{}, fom.problem(), fom.grid(), fom.newton()),
                  std::invalid_argument);
  CHECK_THROWS_AS(agc_point(s, s.evaluate(ParameterVector::Constant(3.0), false), box, 1.0),
                  std::invalid_argument);
}

TEST_CASE("TR-RB stops immediately at a stationary starting point") {
  const FullOrderModel& fom = small_fom();
  const ParameterVector mu0 = ParameterVector::Constant(3.0);
  const MeasurementData data = generate_data(fom, mu0, 0.0, 1);
  const OptimResult r = run_tr_rb(fom, data, CostConfig{}, mu0);
  CHECK(r.iterations == 0);
  CHECK(r.converged);
  CHECK(r.mu_opt == mu0);
  CHECK(*r.e_rel == 0.0);
}

TEST_CASE("both optimizers recover the parameter from exact data") {
  const FullOrderModel& fom = small_fom();
  const ParameterVector star(2, 3, 4, 5);
  const MeasurementData data = generate_data(fom, star, 0.0, 1);
  const OptimResult tr = run_tr_rb(fom, data, CostConfig{}, ParameterVector::Constant(3.0));
  const OptimResult fo = run_fo_reference(fom, data, CostConfig{}, ParameterVector::Constant(3.0));
  CHECK(tr.converged);
  CHECK(fo.converged);
  CHECK(*fo.e_rel <= 1e-2);
  CHECK(*tr.e_rel <= 1e-2);
  CHECK(tr.fom_solves < fo.fom_solves);
  REQUIRE_FALSE(tr.trace.empty());
  CHECK(tr.trace.back().pg_norm <= 1e-5);
}

TEST_CASE("optimizer configurations are validated") {
  CostConfig c;
  c.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  TrConfig t;
  t.shrink = 1.5;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
