#pragma once

#include <vector>

#include "hrb/fe.hpp"
#include "hrb/fom.hpp"
#include "hrb/rom.hpp"

namespace hrb {

/// A pair of per-field quantities (errors, estimates, ...).
struct FieldPair {
  double y = 0.0;
  double q = 0.0;
};

/// E = sqrt(sum_k alpha_k ||x_h^k - x_l^k||_S^2) per field; lifted ROM coefficients in full space.
FieldPair true_error(const StateTrajectory& fom, const Matrix& y_lifted, const Matrix& q_lifted,
                     const AssembledOperators& ops);

/// True error of a reduced trajectory; lifts with the leading columns of \p bases.
FieldPair true_error(const StateTrajectory& fom, const RomTrajectory& rom, const NestedBases& bases,
                     const AssembledOperators& ops);

/// Hierarchical estimate Delta^{l,m} from the small and big reduced trajectories,
/// evaluated with the Gram blocks of the big model only.
FieldPair delta_lm(const RomTrajectory& small, const RomTrajectory& big, const RomOperators& big_ops,
                   const TimeGrid& grid);

/// Delta^l = Delta^{l,m} / sqrt(1 - sigma); throws std::invalid_argument unless 0 <= sigma < 1.
double delta_l(double delta_lm, double sigma);

struct EstimatorCalibration {
  double sigma_y = 0.0;
  double sigma_q = 0.0;
  int training_size = 0;
  std::size_t argmax_y = 0;  ///< training index attaining sigma_y
  std::size_t argmax_q = 0;

  bool saturated() const { return sigma_y < 1.0 && sigma_q < 1.0; }
  double eta_bar_y() const;
  double eta_bar_q() const;
};

/// Errors of the small and big reduced models at one training parameter.
struct SaturationSample {
  FieldPair small;
  FieldPair big;
};

/// sigma = max E_m^2 / E_l^2 over the samples, with the ratio taken as 0 when E_l = 0.
EstimatorCalibration calibrate(const std::vector<SaturationSample>& samples);

/// Solves both reduced models at each training parameter, compares with the given
/// full-order trajectories (same order) and calibrates. Parallel over parameters.
EstimatorCalibration estimate_sigmas(const std::vector<ParameterVector>& training,
                                     const std::vector<const StateTrajectory*>& fom,
                                     const ReducedModel& model, const AssembledOperators& ops,
                                     const TimeGrid& grid, const NewtonConfig& cfg = {},
                                     std::vector<SaturationSample>* samples = nullptr);

struct Efficiency {
  double value = 1.0;
  bool flagged = false;  ///< E = 0 while the estimate is positive
};

Efficiency efficiency(double estimate, double error);

/// alpha L^4 / (2 pi^4) dq^2 + alpha L^2 / pi^2 dq sqrt(J~).
double delta_J(double delta_q, double j_tilde, double alpha_j, double length);

/// Estimator output at one parameter.
struct EstimatorReport {
  FieldPair delta_lm;
  FieldPair delta_l;
  double indicator = 0.0;  ///< (Delta^l_y + Delta^l_q) / 2
};

/// Two reduced solves plus the hierarchical estimate.
EstimatorReport estimate(const ParameterVector& mu, const ReducedModel& model,
                         const RomOperators& small, const EstimatorCalibration& cal,
                         const TimeGrid& grid, const NewtonConfig& cfg = {},
                         RomTrajectory* small_traj = nullptr);

}  // namespace hrb
