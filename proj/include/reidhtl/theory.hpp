#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "reidhtl/io.hpp"
#include "reidhtl/solver.hpp"
#include "reidhtl/types.hpp"

namespace reidhtl {

/// Lagrangian view of the C1 constraint: L_T(M) = ⟨M, Σ_S⟩ + μ*(b − ⟨M, Σ_D⟩).
struct TheoryLoss {
  double mu_star = 0.0;
  double b = 1.0;

  /// ζ for a similar / dissimilar pair in the pairwise form.
  double zeta_similar(const PairData& pairs) const;
  double zeta_dissimilar(const PairData& pairs) const;
  /// γ = μ*·b·n² with n² = n_s + n_d.
  double gamma_offset(const PairData& pairs) const;
};

double theory_loss(const Eigen::MatrixXd& m, const PairData& pairs, const TheoryLoss& tl);
double theory_loss(const Metric& m, const PairData& pairs, const TheoryLoss& tl);

/// The same quantity as a mean over all n² pairs: (1/n²)·Σ (ζ_ij xᵀMx) + γ/n².
double theory_loss_pairwise(const Metric& m, const PairData& pairs, const TheoryLoss& tl);

/// Estimate of the C1 multiplier at the solver output. Zero when the
/// constraint is slack by more than inner_tol; otherwise ψ/α of the last
/// accepted projection, which equals μ* at a fixed point of the projected
/// step M = Π(M − α∇f).
double extract_mu_star(const SolveResult& r, const PairData& pairs, const SolverConfig& cfg);

/// 2·max(1, μ*)·max ‖x_ij‖².
double lipschitz_k(const PairData& pairs, double mu_star);

/// 8k²/(λn).
double theorem1_bound(double k, double lambda, int n);

/// √(L_T(M_S)/λ) + ‖M_S‖_F with M_S = Σ_j β_j M_j; a negative L_T counts as 0.
double theorem2_coefficient(const std::vector<Metric>& sources, const WeightVector& beta,
                            const PairData& pairs, const TheoryLoss& tl, double lambda);

/// theorem2_coefficient·√(ln(2/δ)/(2n)); the O(1/n) term is not included.
/// `m` only fixes the dimension the sources must share.
double theorem2_gap(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                    const PairData& pairs, const TheoryLoss& tl, double lambda, int n, double delta);

struct BoundCheckRow {
  std::uint64_t seed = 0;
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// `seed,n,lhs,rhs,pass`; extra lines are comments (e.g. μ* metadata).
io::CsvTable bound_rows_to_csv(const std::vector<BoundCheckRow>& rows,
                               const std::vector<std::string>& comments = {});
std::vector<BoundCheckRow> bound_rows_from_csv(const io::CsvTable& t);

}  // namespace reidhtl
