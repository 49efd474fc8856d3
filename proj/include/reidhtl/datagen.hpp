#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reidhtl/types.hpp"

namespace reidhtl {

/// Synthetic camera network. Every person is seen `shots_per_camera` times
/// by every camera; the overlap and label fractions are consumed by the
/// on-boarding split, not by `generate`.
struct NetworkSpec {
  int num_cameras = 4;
  int dim = 20;
  int persons_total = 300;
  double target_overlap_fraction = 0.5;
  double label_fraction = 0.2;
  /// Indices into camera_pair_list(num_cameras) whose planted metric is
  /// replaced by a randomly rotated one.
  std::vector<int> outlier_sources;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  int shots_per_camera = 2;
  /// Variance of the appearance nuisance shared by all cameras and of each
  /// camera's own nuisance, in latent units (identity variance is 1).
  double shared_nuisance = 6.0;
  double camera_nuisance = 10.0;
  /// Rank of the two nuisance subspaces; 0 picks max(1, d/6).
  int shared_nuisance_rank = 0;
  int camera_nuisance_rank = 1;
  /// Scale of each camera's random linear distortion A = I + distortion·G/√d.
  double distortion = 0.15;

  /// Throws InvalidSpec.
  void validate() const;
};

/// x = scale·(A (u + noise_scale·L ε) + t) with L Lᵀ = nuisance.
struct CameraModel {
  std::string id;
  Eigen::MatrixXd distortion;
  Eigen::VectorXd offset;
  Eigen::MatrixXd nuisance;
};

struct SyntheticNetwork {
  FeatureTable features;
  /// Lexicographic (a, b) with a < b, aligned with ground_truth.
  std::vector<std::pair<std::string, std::string>> camera_pairs;
  std::vector<Metric> ground_truth;
  std::vector<CameraModel> cameras;
  double feature_scale = 1.0;
  std::map<std::string, Eigen::VectorXd> identity_latents;
};

std::string camera_name(int index);  // 0 → "c1"
std::string person_name(int index, int persons_total);
std::vector<std::pair<int, int>> camera_pair_list(int num_cameras);

SyntheticNetwork generate(const NetworkSpec& spec);

/// Undo a camera's affine map (scale, offset, distortion); for noiseless
/// rows this recovers the identity latent.
Eigen::VectorXd invert_distortion(const SyntheticNetwork& net, const FeatureRow& row);

struct PcaResult {
  FeatureTable table;
  /// out_dim × d with orthonormal rows.
  Eigen::MatrixXd projection;
  Eigen::VectorXd mean;
};

/// Global PCA: fitted on `fit_on` (centered at its mean), applied to `table`.
/// RankDeficient when `fit_on` has fewer than out_dim nonzero singular values.
PcaResult pca_reduce(const FeatureTable& table, int out_dim, const FeatureTable& fit_on);

}  // namespace reidhtl
