#include <doctest.h>

#include <random>

#include "hrb/greedy.hpp"
#include "support.hpp"

using namespace hrb;

namespace {

const FullOrderModel& small_fom() {
  static const FullOrderModel fom(test::small_problem(InputSignal::constant(1.0)), 20, 1, 21);
  return fom;
}

GreedyConfig small_config() {
  GreedyConfig cfg;
  cfg.tol = 1e-3;
  cfg.training = ParameterBox{}.uniform_grid(2);
  return cfg;
}

}  // namespace

TEST_CASE("snapshot pools stack states and sensitivities") {
  const SnapshotSet s = take_snapshots(small_fom(), ParameterVector(2, 2, 2, 2));
  const int k = small_fom().grid().size();
  CHECK(s.y_pool().cols() == 5 * k);
  CHECK(s.q_pool().cols() == 5 * k);
  CHECK(s.f_v0().rows() == small_fom().ops().dim_q());
  CHECK((s.q_pool().leftCols(k) - s.traj.q).norm() == 0.0);
}

TEST_CASE("project_out leaves an S-orthogonal remainder") {
  std::mt19937_64 rng(51);
  const SymBandMatrix& s = small_fom().ops().gram_q;
  const Matrix basis = orthonormalize(Matrix(20, 0), test::random_matrix(rng, 20, 3), s);
  const Matrix x = test::random_matrix(rng, 20, 4);
  const Matrix r = project_out(x, basis, s);
  CHECK((basis.transpose() * (s * r)).norm() <= 1e-12 * x.norm());
  CHECK(project_out(basis, basis, s).norm() <= 1e-12);
}

TEST_CASE("hierarchical spaces keep the enlarged basis orthonormal and nested") {
  const FullOrderModel& fom = small_fom();
  const AssembledOperators& ops = fom.ops();
  HierarchicalSpaces hs(ops);
  const SnapshotSet s = take_snapshots(fom, ParameterVector::Constant(3.0));
  hs.initialize(s, PodRule::energy(1e-10, 5), 2);
  CHECK(hs.y().extra.cols() == 2);
  CHECK(hs.q().extra.cols() == 2);
  const Matrix ey = hs.y().enlarged();
  CHECK((ey.transpose() * (ops.gram_y * ey)).isIdentity(1e-10));
  const NestedBases b0 = hs.bases();
  CHECK(b0.ly == hs.ly());
  CHECK((b0.y.leftCols(b0.ly) - hs.y().primary).norm() == 0.0);

  const SnapshotSet s2 = take_snapshots(fom, ParameterVector(1, 5, 1, 5));
  const Matrix cand = hs.primary_candidates_q(s2.traj.q, PodRule::energy(1e-10, 5));
  REQUIRE(cand.cols() >= 1);
  const Matrix before = hs.q().primary;
  hs.append_primary_q(cand.leftCols(1));
  CHECK(hs.lq() == before.cols() + 1);
  CHECK((hs.q().primary.leftCols(before.cols()) - before).norm() == 0.0);
  CHECK(hs.q().extra.cols() == 2);
  const Matrix eq = hs.q().enlarged();
  CHECK((eq.transpose() * (ops.gram_q * eq)).isIdentity(1e-10));

  hs.enrich_extra_y(s2.y_pool(), 1);
  CHECK(hs.y().extra.cols() == 3);
  hs.add_f_snapshots(s.f_v0());
  hs.add_f_snapshots(s2.f_v0());
  const DeimInterpolant d = hs.build_deim(1e-14);
  CHECK(d.size() <= 3 * (hs.ly() + hs.lq()));
  const Matrix c = hs.compressed_f();
  // The compressed snapshots carry the same Gram matrix as the originals.
  CHECK((c * c.transpose() - hs.f_snapshots() * hs.f_snapshots().transpose()).norm() <=
        1e-9 * hs.f_snapshots().squaredNorm());
}

TEST_CASE("indicator argmax breaks ties lexicographically") {
  std::vector<ParameterVector> p{ParameterVector(2, 1, 1, 1), ParameterVector(1, 3, 1, 1),
                                 ParameterVector(1, 2, 1, 1)};
  std::vector<EstimatorReport> r(3);
  r[0].indicator = 1.0;
  r[1].indicator = 2.0;
  r[2].indicator = 2.0;
  CHECK(argmax_indicator(r, p) == 2);
}

TEST_CASE("weak greedy reaches the tolerance on a coarse instance") {
  const FullOrderModel& fom = small_fom();
  const GreedyResult res = run_weak_greedy(small_config(), fom);
  CHECK(res.converged);
  CHECK(res.e_hat <= 1e-3);
  CHECK(res.calibration.saturated());
  REQUIRE_FALSE(res.history.empty());
  CHECK(res.history.front().mu == ParameterVector::Constant(3.0));
  for (std::size_t i = 1; i < res.history.size(); ++i) {
    CHECK(res.history[i].ly >= res.history[i - 1].ly);
    CHECK(res.history[i].lq >= res.history[i - 1].lq);
  }
  CHECK(res.model.bases.my() > res.model.bases.ly);
  CHECK(res.model.bases.mq() > res.model.bases.lq);

  // On the training set E_m^2 <= sigma E_l^2, so E_l <= Delta^{l,m} / (1 - sqrt(sigma)),
  // and each Delta^l is at most twice the indicator.
  const RomOperators small = res.model.small();
  auto bound = [](double sigma) { return 2e-3 * std::sqrt(1.0 - sigma) / (1.0 - std::sqrt(sigma)) * (1 + 1e-9); };
  for (const ParameterVector& mu : small_config().training) {
    const StateTrajectory h = fom.solve(mu);
    const RomTrajectory rs = solve_rom(mu, small, fom.grid());
    const FieldPair e = true_error(h, rs, res.model.bases, fom.ops());
    CHECK(e.y <= bound(res.calibration.sigma_y));
    CHECK(e.q <= bound(res.calibration.sigma_q));
  }
}

TEST_CASE("greedy configuration is validated") {
  GreedyConfig cfg = small_config();
  cfg.training.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("indicator sweep matches single estimates") {
  const FullOrderModel& fom = small_fom();
  const GreedyResult res = run_weak_greedy(small_config(), fom);
  const std::vector<ParameterVector> p{ParameterVector(1.5, 2, 3, 4), ParameterVector(4, 3, 2, 1.5)};
  const auto reps = error_indicator(p, res.model, res.calibration, fom.grid());
  const RomOperators small = res.model.small();
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(reps[i].indicator ==
          doctest::Approx(estimate(p[i], res.model, small, res.calibration, fom.grid()).indicator).epsilon(1e-14));
}
