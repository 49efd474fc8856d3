#pragma once

#include <Eigen/Dense>

#include "reidhtl/types.hpp"

namespace reidhtl {

/// (1/n_d)·Σ_D xᵀ M x, computed as ⟨M, Σ_D⟩_F.
double dissimilar_mean_distance(const Eigen::MatrixXd& m, const PairData& pairs);

/// The KKT multiplier ψ* = max{0, (b − ⟨M, Σ_D⟩) / ‖Σ_D‖²_F} of the half-space
/// projection. Throws DegenerateScatter when Σ_D = 0.
double c1_multiplier(const Eigen::MatrixXd& m, const PairData& pairs, double b);

/// Nearest point of {M : ⟨M, Σ_D⟩ ≥ b}: M + ψ*·Σ_D. Feasible inputs come
/// back unchanged.
Metric project_c1(const Metric& m, const PairData& pairs, double b);

/// Nearest PSD matrix: eigenvalues clipped at zero. The input is symmetrized
/// first; NotSymmetric when it is off by more than the Metric tolerance.
Metric project_c2(const Metric& m);
Eigen::MatrixXd project_c2(const Eigen::MatrixXd& m);

/// `PaperEq6`: max{0, β / max{1, ‖β‖}} (clip after rescaling).
/// `ExactEuclidean`: clip negatives, then rescale if the norm exceeds one.
WeightVector project_c3(const WeightVector& beta, BetaProjection variant);

struct IntersectionProjection {
  Metric metric;
  int iterations = 0;
  bool converged = false;
  /// Total coefficient on Σ_D added by the C1 steps (plain alternation: the
  /// sum of per-step ψ; Dykstra: the final correction's ψ).
  double psi = 0.0;
};

/// Violations used by the inner stopping rule.
double c1_violation(const Eigen::MatrixXd& m, const PairData& pairs, double b);
double psd_violation(const Eigen::MatrixXd& m);

/// Projection onto C1 ∩ C2 by alternating Π_C1 / Π_C2 (plain or with
/// Dykstra corrections) until both violations are ≤ inner_tol or the
/// iteration cap hits; `converged` is false in the latter case.
IntersectionProjection project_c1_c2(const Metric& m, const PairData& pairs, const SolverConfig& cfg);

}  // namespace reidhtl
