#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hrb/estimators.hpp"
#include "support.hpp"

using namespace hrb;

namespace {

const std::vector<ParameterVector> kTraining{ParameterVector(1, 5, 1, 5), ParameterVector(5, 1, 5, 1),
                                             ParameterVector(2, 3, 4, 2), ParameterVector(4, 4, 2, 3)};

}  // namespace

TEST_CASE("online hierarchical estimate equals its full-space recomputation") {
  const FullOrderModel fom(test::small_problem(InputSignal::step(-1.0, 1.0, 0.5)), 30, 1, 26);
  const ReducedModel rm = test::nested_model(fom, kTraining, 3, 6, 2, 5, 8);
  const RomOperators small = rm.small();
  std::mt19937_64 rng(41);
  for (int t = 0; t < 5; ++t) {
    const ParameterVector mu = test::random_mu(rng);
    const RomTrajectory rs = solve_rom(mu, small, fom.grid()), rb = solve_rom(mu, rm.big, fom.grid());
    const FieldPair online = delta_lm(rs, rb, rm.big, fom.grid());
    const Matrix dy = lift_y(rm.bases, rb.y) - lift_y(rm.bases, rs.y);
    const Matrix dq = lift_q(rm.bases, rb.q) - lift_q(rm.bases, rs.q);
    const double ry = std::sqrt(test::weighted_norm2(dy, fom.ops().gram_y, fom.grid()));
    const double rq = std::sqrt(test::weighted_norm2(dq, fom.ops().gram_q, fom.grid()));
    CHECK(std::abs(online.y - ry) <= 1e-10 * std::max(1.0, ry));
    CHECK(std::abs(online.q - rq) <= 1e-10 * std::max(1.0, rq));

    const StateTrajectory h = fom.solve(mu);
    const FieldPair e = true_error(h, rs, rm.bases, fom.ops());
    const double ey = std::sqrt(test::weighted_norm2(h.y - lift_y(rm.bases, rs.y), fom.ops().gram_y, fom.grid()));
    CHECK(e.y == doctest::Approx(ey).epsilon(1e-10));
    // Reverse triangle inequality: |E_l - E_m| <= Delta^{l,m} <= E_l + E_m.
    const FieldPair em = true_error(h, rb, rm.bases, fom.ops());
    CHECK(online.q <= e.q + em.q + 1e-12);
    CHECK(online.q >= std::abs(e.q - em.q) - 1e-12);
    CHECK(online.y <= e.y + em.y + 1e-12);
    CHECK(online.y >= std::abs(e.y - em.y) - 1e-12);

    EstimatorCalibration cal;
    cal.sigma_y = 0.3;
    cal.sigma_q = 0.5;
    const EstimatorReport rep = estimate(mu, rm, small, cal, fom.grid());
    CHECK(rep.delta_lm.y == doctest::Approx(online.y).epsilon(1e-12));
    CHECK(rep.delta_l.q == doctest::Approx(online.q / std::sqrt(0.5)).epsilon(1e-12));
    CHECK(rep.indicator == doctest::Approx(0.5 * (rep.delta_l.y + rep.delta_l.q)));
  }
}

TEST_CASE("identical small and big models give a zero estimate") {
  const FullOrderModel fom(test::small_problem(), 20, 1, 11);
  const ReducedModel rm = test::nested_model(fom, kTraining, 4, 4, 3, 3, 6);
  const ParameterVector mu(2, 2, 2, 2);
  const RomTrajectory r = solve_rom(mu, rm.big, fom.grid());
  const FieldPair d = delta_lm(r, r, rm.big, fom.grid());
  CHECK(d.y == 0.0);
  CHECK(d.q == 0.0);
}

TEST_CASE("calibration takes the largest squared error ratio") {
  std::vector<SaturationSample> s{{{1.0, 2.0}, {0.5, 0.2}}, {{2.0, 1.0}, {0.2, 0.9}}, {{0.0, 0.0}, {0.1, 0.1}}};
  const EstimatorCalibration c = calibrate(s);
  CHECK(c.sigma_y == doctest::Approx(0.25));
  CHECK(c.sigma_q == doctest::Approx(0.81));
  CHECK(c.argmax_y == 0);
  CHECK(c.argmax_q == 1);
  CHECK(c.training_size == 3);
  CHECK(c.saturated());
  CHECK(c.eta_bar_q() == doctest::Approx(std::sqrt(1.81 / 0.19)));
  CHECK_THROWS_AS(calibrate({}), std::invalid_argument);
}

TEST_CASE("estimator scalings") {
  CHECK(delta_l(0.3, 0.19) == doctest::Approx(0.3 / 0.9));
  CHECK(delta_l(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(delta_l(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_l(1.0, -0.1), std::invalid_argument);

  CHECK(efficiency(2.0, 1.0).value == 2.0);
  CHECK(efficiency(0.0, 0.0).value == 1.0);
  CHECK_FALSE(efficiency(0.0, 0.0).flagged);
  CHECK(efficiency(1.0, 0.0).flagged);

  const double pi = std::numbers::pi, a = 1e5, l = 2.0, dq = 1e-4, j = 3.0;
  const double cp = l * l / (pi * pi);
  CHECK(delta_J(dq, j, a, l) == doctest::Approx(a * cp * cp / 2 * dq * dq + a * cp * dq * std::sqrt(j)));
  CHECK(delta_J(0.0, j, a, l) == 0.0);
  CHECK_THROWS_AS(delta_J(-1.0, j, a, l), std::invalid_argument);
}

TEST_CASE("parallel calibration over a training set") {
  const FullOrderModel fom(test::small_problem(), 20, 1, 11);
  const ReducedModel rm = test::nested_model(fom, kTraining, 2, 5, 2, 5, 6);
  std::vector<StateTrajectory> h;
  for (const ParameterVector& mu : kTraining) h.push_back(fom.solve(mu));
  std::vector<const StateTrajectory*> ptr;
  for (const StateTrajectory& t : h) ptr.push_back(&t);
  std::vector<SaturationSample> samples;
  const EstimatorCalibration c = estimate_sigmas(kTraining, ptr, rm, fom.ops(), fom.grid(), {}, &samples);
  REQUIRE(samples.size() == kTraining.size());
  double best = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RomTrajectory rs = solve_rom(kTraining[i], rm.small(), fom.grid());
    const FieldPair e = true_error(h[i], rs, rm.bases, fom.ops());
    CHECK(samples[i].small.q == doctest::Approx(e.q).epsilon(1e-12));
    best = std::max(best, std::pow(samples[i].big.q / samples[i].small.q, 2));
  }
  CHECK(c.sigma_q == doctest::Approx(best).epsilon(1e-12));
}
