#include "hrb/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hrb/parallel.hpp"

namespace hrb {

namespace {

double trapezoid_norm2(const Matrix& diff, const SymBandMatrix& gram, const TimeGrid& grid) {
  const Matrix sd = gram * diff;
  double acc = 0.0;
  for (int k = 0; k < grid.size(); ++k) acc += grid.weight(k) * diff.col(k).dot(sd.col(k));
  return acc;
}

// sum_k alpha_k ||Psi_m b^k - Psi_l s^k||_S^2 from Gram blocks of the big model.
double hierarchical_norm2(const Matrix& small, const Matrix& big, const Matrix& gram,
                          const TimeGrid& grid) {
  Matrix d = big;
  d.topRows(small.rows()) -= small;
  const Matrix gd = gram * d;
  double acc = 0.0;
  for (int k = 0; k < grid.size(); ++k) acc += grid.weight(k) * d.col(k).dot(gd.col(k));
  return std::max(acc, 0.0);
}

}  // namespace

FieldPair true_error(const StateTrajectory& fom, const Matrix& y_lifted, const Matrix& q_lifted,
                     const AssembledOperators& ops) {
  if (y_lifted.rows() != fom.y.rows() || y_lifted.cols() != fom.y.cols() ||
      q_lifted.rows() != fom.q.rows() || q_lifted.cols() != fom.q.cols())
    throw std::invalid_argument("true_error: trajectory shapes differ");
  return {std::sqrt(trapezoid_norm2(fom.y - y_lifted, ops.gram_y, fom.grid)),
          std::sqrt(trapezoid_norm2(fom.q - q_lifted, ops.gram_q, fom.grid))};
}

FieldPair true_error(const StateTrajectory& fom, const RomTrajectory& rom, const NestedBases& bases,
                     const AssembledOperators& ops) {
  return true_error(fom, lift_y(bases, rom.y), lift_q(bases, rom.q), ops);
}

FieldPair delta_lm(const RomTrajectory& small, const RomTrajectory& big, const RomOperators& big_ops,
                   const TimeGrid& grid) {
  if (big.y.rows() != big_ops.ny || big.q.rows() != big_ops.nq || small.y.rows() > big.y.rows() ||
      small.q.rows() > big.q.rows())
    throw std::invalid_argument("delta_lm: trajectories do not match the big model");
  return {std::sqrt(hierarchical_norm2(small.y, big.y, big_ops.gram_y, grid)),
          std::sqrt(hierarchical_norm2(small.q, big.q, big_ops.gram_q, grid))};
}

double delta_l(double delta_lm, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw std::invalid_argument("delta_l: sigma must lie in [0, 1)");
  return delta_lm / std::sqrt(1.0 - sigma);
}

double EstimatorCalibration::eta_bar_y() const { return std::sqrt((1 + sigma_y) / (1 - sigma_y)); }
double EstimatorCalibration::eta_bar_q() const { return std::sqrt((1 + sigma_q) / (1 - sigma_q)); }

EstimatorCalibration calibrate(const std::vector<SaturationSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("calibrate: empty training set");
  EstimatorCalibration cal;
  cal.training_size = static_cast<int>(samples.size());
  auto ratio = [](double big, double small) { return small > 0.0 ? big * big / (small * small) : 0.0; };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ry = ratio(samples[i].big.y, samples[i].small.y);
    const double rq = ratio(samples[i].big.q, samples[i].small.q);
    if (ry > cal.sigma_y) cal.sigma_y = ry, cal.argmax_y = i;
    if (rq > cal.sigma_q) cal.sigma_q = rq, cal.argmax_q = i;
  }
  return cal;
}

EstimatorCalibration estimate_sigmas(const std::vector<ParameterVector>& training,
                                     const std::vector<const StateTrajectory*>& fom,
                                     const ReducedModel& model, const AssembledOperators& ops,
                                     const TimeGrid& grid, const NewtonConfig& cfg,
                                     std::vector<SaturationSample>* samples) {
  if (training.size() != fom.size())
    throw std::invalid_argument("estimate_sigmas: training/FOM size mismatch");
  const RomOperators small = model.small();
  std::vector<SaturationSample> out(training.size());
  parallel_for(training.size(), [&](std::size_t i) {
    const RomTrajectory rs = solve_rom(training[i], small, grid, cfg);
    const RomTrajectory rb = solve_rom(training[i], model.big, grid, cfg);
    out[i].small = true_error(*fom[i], rs, model.bases, ops);
    out[i].big = true_error(*fom[i], rb, model.bases, ops);
  });
  const EstimatorCalibration cal = calibrate(out);
  if (samples) *samples = std::move(out);
  return cal;
}

Efficiency efficiency(double estimate, double error) {
  if (error > 0.0) return {estimate / error, false};
  return {1.0, estimate > 0.0};
}

double delta_J(double delta_q, double j_tilde, double alpha_j, double length) {
  if (delta_q < 0.0 || j_tilde < 0.0 || alpha_j < 0.0 || length <= 0.0)
    throw std::invalid_argument("delta_J: inputs must be nonnegative");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double l2 = length * length;
  return alpha_j * l2 * l2 / (2.0 * pi2 * pi2) * delta_q * delta_q +
         alpha_j * l2 / pi2 * delta_q * std::sqrt(j_tilde);
}

EstimatorReport estimate(const ParameterVector& mu, const ReducedModel& model,
                         const RomOperators& small, const EstimatorCalibration& cal,
                         const TimeGrid& grid, const NewtonConfig& cfg, RomTrajectory* small_traj) {
  RomTrajectory rs = solve_rom(mu, small, grid, cfg);
  const RomTrajectory rb = solve_rom(mu, model.big, grid, cfg);
  EstimatorReport rep;
  rep.delta_lm = delta_lm(rs, rb, model.big, grid);
  rep.delta_l = {delta_l(rep.delta_lm.y, cal.sigma_y), delta_l(rep.delta_lm.q, cal.sigma_q)};
  rep.indicator = 0.5 * (rep.delta_l.y + rep.delta_l.q);
  if (small_traj) *small_traj = std::move(rs);
  return rep;
}

}  // namespace hrb
