#pragma once

#include <array>
#include <climits>
#include <optional>
#include <vector>

#include "hrb/band.hpp"
#include "hrb/fe.hpp"
#include "hrb/fom.hpp"
#include "hrb/problem.hpp"

namespace hrb {

// ---------------------------------------------------------------------------
// POD

/// Truncation rule: a fixed rank, or the smallest rank r with
/// sum_{i<=r} sigma_i^2 >= (1 - energy_tol) sum_i sigma_i^2, optionally capped.
struct PodRule {
  int rank = 0;
  double energy_tol = 0.0;
  int max_rank = INT_MAX;

  static PodRule fixed_rank(int r) { return {r, 0.0, INT_MAX}; }
  static PodRule energy(double tol, int cap = INT_MAX) { return {0, tol, cap}; }
};

struct PodResult {
  Matrix basis;                ///< orthonormal in the weighting inner product
  Vector singular_values;      ///< all singular values, descending
  int numerical_rank = 0;
  bool truncated = false;      ///< a fixed rank above the numerical rank was requested
};

/// POD of the snapshot columns in the inner product (u, v) = u^T S v.
PodResult pod(const Matrix& snapshots, const SymBandMatrix& gram, const PodRule& rule);
/// POD in the Euclidean inner product.
PodResult pod(const Matrix& snapshots, const PodRule& rule);

/// Two passes of classical Gram-Schmidt in the S-inner product.
/// Candidates are orthogonalised against \p fixed (assumed S-orthonormal) and each other;
/// a candidate whose norm drops below drop_tol times its original norm is discarded.
Matrix orthonormalize(const Matrix& fixed, const Matrix& candidates, const SymBandMatrix& gram,
                      double drop_tol = 1e-8);

// ---------------------------------------------------------------------------
// DEIM

/// Interpolant for f over V0 (the node-0 value of f is always zero).
struct DeimInterpolant {
  Matrix basis;             ///< n x l_f collateral basis
  std::vector<int> points;  ///< V0 indices, pairwise distinct
  Matrix sampled_basis;     ///< P^T basis, l_f x l_f

  int size() const { return static_cast<int>(points.size()); }
  /// basis (P^T basis)^{-1} P^T s for each column s.
  Matrix interpolate(const Matrix& snapshots) const;
  /// [0; basis], the (n+1)-row variant used for the y equation.
  Matrix padded_basis() const;
};

/// Euclidean POD of the snapshots with \p size modes followed by greedy point selection.
/// Throws SingularSystem if the snapshots have fewer than \p size numerically independent modes.
DeimInterpolant deim_build(const Matrix& snapshots, int size);
/// Energy-rule variant: size from PodRule::energy(tol, cap).
DeimInterpolant deim_build(const Matrix& snapshots, double energy_tol, int cap);

// ---------------------------------------------------------------------------
// Reduced model

/// Enlarged bases of dimension (m_y, m_q) whose leading (l_y, l_q) columns span V^l.
struct NestedBases {
  Matrix y;  ///< (n+1) x m_y
  Matrix q;  ///< n x m_q
  int ly = 0;
  int lq = 0;

  int my() const { return static_cast<int>(y.cols()); }
  int mq() const { return static_cast<int>(q.cols()); }
};

/// Everything the online phase needs; no array has a dimension equal to n.
struct RomOperators {
  int ny = 0, nq = 0;  ///< reduced dimensions
  Matrix mass_y, stiffness_1;
  Matrix mass_q, stiffness_2;
  Matrix g_y, g_q;              ///< projected DEIM operators, ny x l_f and nq x l_f
  Matrix sample_y, sample_q;    ///< basis rows at the DEIM points, l_f x ny and l_f x nq
  Matrix input;                 ///< nq x K, projected boundary vectors
  Vector y_init;                ///< Psi_y^T (<y0, phi_i>)_i
  Matrix gram_y, gram_q;        ///< Psi^T S Psi
  // Tracking-cost data (empty until attach_cost)
  Matrix cost_r1;  ///< nq x K: Psi_q^T M_q w^k
  Vector cost_r2;  ///< K: (w^k)^T M_q w^k

  int deim_size() const { return static_cast<int>(g_y.cols()); }
  bool has_cost() const { return cost_r1.size() > 0; }
  /// Operators of the nested sub-model spanned by the leading columns.
  RomOperators truncate(int ly, int lq) const;
};

struct ReducedModel {
  NestedBases bases;
  DeimInterpolant deim;
  RomOperators big;  ///< over the enlarged bases

  RomOperators small() const { return big.truncate(bases.ly, bases.lq); }
};

ReducedModel project_operators(const AssembledOperators& ops, const ProblemDefinition& problem,
                               const FeSpace& space, const TimeGrid& grid, NestedBases bases,
                               DeimInterpolant deim);

/// Stores r1, r2 for the data w (n x K).
void attach_cost(ReducedModel& model, const AssembledOperators& ops, const Matrix& data);

struct RomTrajectory {
  Matrix y;  ///< ny x K
  Matrix q;  ///< nq x K
  std::vector<int> newton_iterations;
  double min_y_sampled = 0.0;  ///< smallest y at the DEIM points
};

RomTrajectory solve_rom(const ParameterVector& mu, const RomOperators& rom, const TimeGrid& grid,
                        const NewtonConfig& cfg = {});

struct RomSensitivities {
  std::array<Matrix, 4> s_y;
  std::array<Matrix, 4> s_q;
};

RomSensitivities solve_rom_sensitivities(const ParameterVector& mu, const RomOperators& rom,
                                         const RomTrajectory& traj, const TimeGrid& grid);

/// Full-space coefficients Psi x for the leading columns matching the trajectory size.
Matrix lift_y(const NestedBases& bases, const Matrix& coeffs);
Matrix lift_q(const NestedBases& bases, const Matrix& coeffs);

}  // namespace hrb
