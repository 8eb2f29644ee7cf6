#pragma once

#include <optional>
#include <vector>

#include "hrb/estimators.hpp"
#include "hrb/model.hpp"
#include "hrb/rom.hpp"

namespace hrb {

/// Full-order data at one parameter: states, sensitivities and nodal f over V0.
struct SnapshotSet {
  ParameterVector mu;
  StateTrajectory traj;
  SensitivityTrajectory sens;

  Matrix y_pool() const;  ///< [y, s_y1..s_y4]
  Matrix q_pool() const;  ///< [q, s_q1..s_q4]
  Matrix f_v0() const;    ///< f at the V0 nodes, n x K
};

SnapshotSet take_snapshots(const FullOrderModel& fom, const ParameterVector& mu);

/// Removes the S-orthogonal projection onto the orthonormal columns of \p basis (two passes).
Matrix project_out(const Matrix& x, const Matrix& basis, const SymBandMatrix& gram);

/// One field's hierarchy: V^l (primary) and its S-orthogonal complement part V~^m (extra).
struct FieldSpaces {
  Matrix primary;
  Matrix extra;
  Matrix pool;  ///< snapshot candidates used to refill V~^m

  Matrix enlarged() const;
};

/// Nested pair of hierarchies for y and q together with the f-snapshots used for DEIM.
class HierarchicalSpaces {
 public:
  HierarchicalSpaces(const AssembledOperators& ops) : ops_(&ops) {}

  /// V^l from POD of the states, V~^m from POD (rank \p enlarged_dim) of
  /// states and sensitivities orthogonalised against V^l.
  void initialize(const SnapshotSet& snap, const PodRule& primary_rule, int enlarged_dim);

  /// POD modes of \p snapshots orthogonalised against V^l, in decreasing importance.
  Matrix primary_candidates_y(const Matrix& snapshots, const PodRule& rule) const;
  Matrix primary_candidates_q(const Matrix& snapshots, const PodRule& rule) const;
  /// Appends S-orthonormalised modes to V^l and re-orthogonalises V~^m against it,
  /// keeping its dimension (refilled from the pool when columns collapse).
  void append_primary_y(const Matrix& modes);
  void append_primary_q(const Matrix& modes);

  /// Appends \p count POD modes of \p snapshots, orthogonalised against V^m, to V~^m.
  void enrich_extra_y(const Matrix& snapshots, int count);
  void enrich_extra_q(const Matrix& snapshots, int count);

  void add_pool(const SnapshotSet& snap);
  void add_f_snapshots(const Matrix& f);
  const Matrix& f_snapshots() const { return f_; }

  /// DEIM from all stored f-snapshots: energy rule, capped at 3 (l_y + l_q).
  DeimInterpolant build_deim(double energy_tol) const;
  NestedBases bases() const;

  /// Restores spaces from a previous run; \p f stands in for the f-snapshots
  /// (e.g. compressed_f() of that run). The pool becomes the enlarged bases.
  void assign(const NestedBases& bases, const Matrix& f);
  /// Left singular vectors of the f-snapshots scaled by their singular values.
  Matrix compressed_f() const;

  const FieldSpaces& y() const { return y_; }
  const FieldSpaces& q() const { return q_; }
  int ly() const { return static_cast<int>(y_.primary.cols()); }
  int lq() const { return static_cast<int>(q_.primary.cols()); }

 private:
  void append_primary(FieldSpaces& fs, const Matrix& modes, const SymBandMatrix& gram);
  void enrich_extra(FieldSpaces& fs, const Matrix& snapshots, int count, const SymBandMatrix& gram);

  const AssembledOperators* ops_;
  FieldSpaces y_, q_;
  Matrix f_;
};

struct GreedyConfig {
  double tol = 1e-4;
  int max_basis = 50;
  std::vector<ParameterVector> training;
  std::optional<ParameterVector> initial_mu;  ///< box center when unset
  PodRule primary_rule = PodRule::energy(1e-10, 5);
  int enlarged_dim = 2;
  int saturation_increment = 1;
  int max_saturation_rounds = 20;
  double deim_tol = 1e-14;
  bool verbose = false;

  void validate() const;
};

struct GreedyIteration {
  int iteration = 0;
  ParameterVector mu;
  double e_hat = 0.0;
  int ly = 0, lq = 0, my = 0, mq = 0, lf = 0;
  double sigma_y = 0.0, sigma_q = 0.0;
};

struct GreedyResult {
  ReducedModel model;
  Matrix f_compressed;  ///< see HierarchicalSpaces::compressed_f
  EstimatorCalibration calibration;
  std::vector<GreedyIteration> history;
  double e_hat = 0.0;
  bool converged = false;    ///< e_hat <= tol
  bool cap_reached = false;  ///< l_y + l_q >= max_basis
  long fom_solves = 0;
  double seconds = 0.0;
};

/// Indicator sweep over a parameter set; returns per-parameter reports.
/// Parameters where the reduced solve fails get a negative indicator and a warning.
std::vector<EstimatorReport> error_indicator(const std::vector<ParameterVector>& params,
                                             const ReducedModel& model,
                                             const EstimatorCalibration& cal,
                                             const TimeGrid& grid, const NewtonConfig& cfg = {});

/// Largest indicator; ties go to the lexicographically smallest parameter.
std::size_t argmax_indicator(const std::vector<EstimatorReport>& reports,
                             const std::vector<ParameterVector>& params);

GreedyResult run_weak_greedy(const GreedyConfig& cfg, const FullOrderModel& fom);

}  // namespace hrb
