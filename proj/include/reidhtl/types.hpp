#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace reidhtl {

/// A symmetric d×d Mahalanobis metric. Symmetry is enforced at
/// construction; positive semidefiniteness is only enforced by `validated`.
class Metric {
 public:
  static constexpr double kSymmetryTol = 1e-9;
  static constexpr double kPsdRelTol = 1e-8;

  /// Throws NotSymmetric beyond kSymmetryTol, DimensionMismatch when not square.
  explicit Metric(const Eigen::MatrixXd& m);

  /// Same as the constructor, and additionally throws NotPsd.
  static Metric validated(const Eigen::MatrixXd& m);
  static Metric identity(int dim);
  static Metric zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double min_eigenvalue() const;
  bool is_psd(double rel_tol = kPsdRelTol) const;

 private:
  Eigen::MatrixXd m_;
};

bool is_symmetric(const Eigen::MatrixXd& m, double tol = Metric::kSymmetryTol);

/// Source weights β. Membership in {β ≥ 0, ‖β‖₂ ≤ 1} is checked, not enforced.
class WeightVector {
 public:
  static constexpr double kNonnegTol = 1e-12;
  static constexpr double kNormTol = 1e-9;

  explicit WeightVector(Eigen::VectorXd w);
  static WeightVector uniform(int n);

  int size() const { return static_cast<int>(w_.size()); }
  const Eigen::VectorXd& values() const { return w_; }
  double operator[](int i) const { return w_(i); }

  bool in_unit_orthant_ball() const;

 private:
  Eigen::VectorXd w_;
};

/// Similar / dissimilar difference vectors (stored as columns) with their
/// cached scatter matrices Σ_S and Σ_D. Immutable.
class PairData {
 public:
  /// `similar` and `dissimilar` are d×n matrices whose columns are x_i − x_j.
  /// Requires at least one similar pair; an empty dissimilar set yields Σ_D = 0.
  PairData(Eigen::MatrixXd similar, Eigen::MatrixXd dissimilar);

  static PairData from_diffs(const std::vector<Eigen::VectorXd>& similar,
                             const std::vector<Eigen::VectorXd>& dissimilar);

  int dim() const { return static_cast<int>(similar_.rows()); }
  int n_similar() const { return static_cast<int>(similar_.cols()); }
  int n_dissimilar() const { return static_cast<int>(dissimilar_.cols()); }

  const Eigen::MatrixXd& similar_diffs() const { return similar_; }
  const Eigen::MatrixXd& dissimilar_diffs() const { return dissimilar_; }
  const Eigen::MatrixXd& sigma_similar() const { return sigma_s_; }
  const Eigen::MatrixXd& sigma_dissimilar() const { return sigma_d_; }

  /// Largest ‖x_ij‖² over both sets.
  double max_diff_sq_norm() const;

 private:
  Eigen::MatrixXd similar_;
  Eigen::MatrixXd dissimilar_;
  Eigen::MatrixXd sigma_s_;
  Eigen::MatrixXd sigma_d_;
};

/// (1/n)·Σ x xᵀ over the columns, accumulated so the result is exactly symmetric.
Eigen::MatrixXd scatter(const Eigen::MatrixXd& columns);

enum class BetaProjection { PaperEq6, ExactEuclidean };
enum class InnerProjection { PlainAlternation, Dykstra };

struct SolverConfig {
  double lambda = 1e-2;
  double b = 1.0;
  double alpha = 1e-3;
  double gamma = 1e-3;
  int max_outer_iters = 5000;
  int max_inner_iters = 1000;
  double outer_tol = 1e-6;
  double inner_tol = 1e-7;
  BetaProjection beta_projection = BetaProjection::PaperEq6;
  InnerProjection inner_projection = InnerProjection::PlainAlternation;
  /// Halve α (γ) whenever the projected iterate increases the objective.
  bool backtracking = true;

  /// Throws InvalidArgument on a non-positive (or negative λ) field.
  void validate() const;
};

struct FeatureRow {
  std::string person_id;
  std::string camera_id;
  Eigen::VectorXd feature;
};

/// Rows of (person, camera, feature). Filtering returns new tables.
class FeatureTable {
 public:
  FeatureTable(int dim, std::vector<FeatureRow> rows);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<FeatureRow>& rows() const { return rows_; }

  FeatureTable camera(std::string_view camera_id) const;
  FeatureTable with_persons(const std::vector<std::string>& person_ids) const;

  /// Sorted, unique.
  std::vector<std::string> camera_ids() const;
  std::vector<std::string> person_ids() const;

 private:
  int dim_;
  std::vector<FeatureRow> rows_;
};

/// All cross-camera pairs (one per target row × source row). Same person →
/// similar, otherwise dissimilar. With `balance`, dissimilar pairs are
/// subsampled without replacement (seeded) down to n_s.
PairData build_pair_data(const FeatureTable& target, const FeatureTable& source, bool balance,
                         std::uint64_t seed = 0);

}  // namespace reidhtl
