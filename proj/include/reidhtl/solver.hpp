#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reidhtl/types.hpp"

namespace reidhtl {

struct SolveResult {
  Metric metric;
  WeightVector weights;
  /// (iteration, objective). The final entry is the returned iterate, which
  /// is the best one seen.
  std::vector<std::pair<int, double>> objective_trace;
  bool converged = false;
  int iterations = 0;
  /// Σ_D coefficient of the last accepted C1∩C2 projection and the M step size
  /// that produced it; read by the μ* estimator.
  double final_psi = 0.0;
  double final_alpha = 0.0;
  /// Set when some inner C1∩C2 projection hit max_inner_iters.
  bool inner_cap_hit = false;
};

/// Σ_j β_j M_j.
Eigen::MatrixXd combine_sources(const std::vector<Metric>& sources, const WeightVector& beta);

/// (1/n_s)·Σ_S xᵀMx + λ‖M − Σ_j β_j M_j‖²_F.
double objective(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                 const PairData& pairs, double lambda);

/// Σ_S + 2λ(M − Σ_j β_j M_j).
Eigen::MatrixXd grad_m(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                       const PairData& pairs, double lambda);

/// a_i = 2λβ_i tr(M_iᵀM_i) − 2λ tr(M_iᵀ(M − Σ_{j≠i} β_j M_j)).
Eigen::VectorXd grad_beta(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                          double lambda);

/// Step sizes at the reciprocal block Lipschitz constants: α = 1/(2λ) and
/// γ = 1/(2λ·‖G‖₂) with G_ij = ⟨M_i, M_j⟩. Requires λ > 0.
std::pair<double, double> lipschitz_step_sizes(const std::vector<Metric>& sources, double lambda);

/// Identity scaled by max{1, b / ((1/n_d)·Σ_D xᵀx)}.
Metric default_initial_metric(const PairData& pairs, double b);

/// Projected alternating minimization: M step along −∇_M, project onto
/// C1∩C2, β step along −∇_β, project onto C3; until the relative objective
/// change is ≤ outer_tol or max_outer_iters.
SolveResult solve(const std::vector<Metric>& sources, const PairData& pairs, const SolverConfig& cfg,
                  const std::optional<Metric>& init_m = std::nullopt,
                  const std::optional<WeightVector>& init_beta = std::nullopt);

}  // namespace reidhtl
