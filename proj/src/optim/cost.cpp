#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hrb/optim.hpp"

namespace hrb {

MeasurementData generate_data(const FullOrderModel& fom, const ParameterVector& mu_star,
                              double noise_variance, std::uint64_t seed) {
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("generate_data: negative variance");
  if (!fom.problem().box.contains(mu_star))
    throw std::invalid_argument("generate_data: mu* outside the parameter box");
  MeasurementData d;
  d.w = fom.solve(mu_star).q;
  d.mu_star = mu_star;
  d.noise_variance = noise_variance;
  d.seed = seed;
  if (noise_variance > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
    for (Eigen::Index k = 0; k < d.w.cols(); ++k)
      for (Eigen::Index j = 0; j < d.w.rows(); ++j) d.w(j, k) += noise(rng);
  }
  return d;
}

void CostConfig::validate() const {
  if (!(alpha_j > 0.0)) throw std::invalid_argument("cost: alpha_J must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("cost: lambda must be positive");
}

CostValue cost_fom(const ParameterVector& mu, const StateTrajectory& traj, const MeasurementData& data,
                   const CostConfig& cfg, const AssembledOperators& ops) {
  if (data.w.rows() != traj.q.rows() || data.w.cols() != traj.q.cols())
    throw std::invalid_argument("cost_fom: data shape does not match the trajectory");
  const Matrix diff = traj.q - data.w;
  const Matrix md = ops.mass_q * diff;
  CostValue c;
  for (int k = 0; k < traj.grid.size(); ++k)
    c.misfit += traj.grid.weight(k) * diff.col(k).dot(md.col(k));
  c.j = 0.5 * cfg.alpha_j * c.misfit + 0.5 * cfg.lambda * (mu - cfg.mu_ref).squaredNorm();
  return c;
}

ParameterVector grad_fom(const ParameterVector& mu, const StateTrajectory& traj,
                         const SensitivityTrajectory& sens, const MeasurementData& data,
                         const CostConfig& cfg, const AssembledOperators& ops) {
  const Matrix md = ops.mass_q * Matrix(traj.q - data.w);
  ParameterVector g = cfg.lambda * (mu - cfg.mu_ref);
  for (int i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (int k = 0; k < traj.grid.size(); ++k)
      acc += traj.grid.weight(k) * sens.s_q[i].col(k).dot(md.col(k));
    g[i] += cfg.alpha_j * acc;
  }
  return g;
}

CostValue cost_rom(const ParameterVector& mu, const RomTrajectory& traj, const RomOperators& rom,
                   const CostConfig& cfg, const TimeGrid& grid) {
  if (!rom.has_cost()) throw std::invalid_argument("cost_rom: reduced model carries no data");
  const Matrix mq = rom.mass_q * traj.q;
  CostValue c;
  for (int k = 0; k < grid.size(); ++k) {
    const double v = traj.q.col(k).dot(mq.col(k)) - 2.0 * traj.q.col(k).dot(rom.cost_r1.col(k)) +
                     rom.cost_r2[k];
    c.misfit += grid.weight(k) * v;
  }
  c.misfit = std::max(c.misfit, 0.0);
  c.j = 0.5 * cfg.alpha_j * c.misfit + 0.5 * cfg.lambda * (mu - cfg.mu_ref).squaredNorm();
  return c;
}

ParameterVector grad_rom(const ParameterVector& mu, const RomTrajectory& traj,
                         const RomSensitivities& sens, const RomOperators& rom,
                         const CostConfig& cfg, const TimeGrid& grid) {
  if (!rom.has_cost()) throw std::invalid_argument("grad_rom: reduced model carries no data");
  const Matrix r = rom.mass_q * traj.q - rom.cost_r1;
  ParameterVector g = cfg.lambda * (mu - cfg.mu_ref);
  for (int i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (int k = 0; k < grid.size(); ++k) acc += grid.weight(k) * sens.s_q[i].col(k).dot(r.col(k));
    g[i] += cfg.alpha_j * acc;
  }
  return g;
}

ParameterVector projected_gradient(const ParameterVector& mu, const ParameterVector& g,
                                   const ParameterBox& box) {
  return mu - box.project(mu - g);
}

}  // namespace hrb
