#include "reidhtl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "reidhtl/errors.hpp"

namespace reidhtl {

namespace {

// Latent nuisance structure: a network-wide subspace every camera shares,
// one camera-specific subspace per camera, and a small isotropic floor.
constexpr double kIsotropicNuisanceVar = 0.3;
constexpr double kOffsetStd = 0.1;
constexpr double kPlantedRidge = 1e-2;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Eigen::VectorXd gaussian(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal_(rng_);
    return v;
  }

  Eigen::MatrixXd gaussian(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = normal_(rng_);
    }
    return m;
  }

  /// d×r with orthonormal columns; r = d gives a Haar-distributed rotation.
  Eigen::MatrixXd orthonormal(int d, int r) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(d, r));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
    const Eigen::MatrixXd rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (int j = 0; j < r; ++j) {
      if (rr(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void NetworkSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  if (num_cameras < 2) fail("cameras must be at least 2");
  if (dim < 1) fail("dim must be positive");
  if (persons_total < 2) fail("persons must be at least 2");
  if (!(target_overlap_fraction > 0.0 && target_overlap_fraction <= 1.0)) fail("overlap fraction must be in (0, 1]");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) fail("label fraction must be in (0, 1]");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) fail("noise scale must be nonnegative");
  if (shots_per_camera < 1) fail("shots per camera must be positive");
  if (!(shared_nuisance >= 0.0 && std::isfinite(shared_nuisance))) fail("shared nuisance must be nonnegative");
  if (shared_nuisance_rank < 0 || shared_nuisance_rank > dim) fail("shared nuisance rank must be in [0, dim]");
  if (camera_nuisance_rank < 0 || camera_nuisance_rank > dim) fail("camera nuisance rank must be in [0, dim]");
  if (!(distortion >= 0.0 && std::isfinite(distortion))) fail("distortion must be nonnegative");
  if (!(camera_nuisance >= 0.0 && std::isfinite(camera_nuisance))) fail("camera nuisance must be nonnegative");
  const int pairs = num_cameras * (num_cameras - 1) / 2;
  for (int o : outlier_sources) {
    if (o < 0 || o >= pairs) fail("outlier source index " + std::to_string(o) + " out of range");
  }
}

std::string camera_name(int index) { return "c" + std::to_string(index + 1); }

std::string person_name(int index, int persons_total) {
  const int width = std::max<int>(4, static_cast<int>(std::to_string(persons_total).size()));
  std::string n = std::to_string(index + 1);
  return "p" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n;
}

std::vector<std::pair<int, int>> camera_pair_list(int num_cameras) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < num_cameras; ++a) {
    for (int b = a + 1; b < num_cameras; ++b) out.emplace_back(a, b);
  }
  return out;
}

SyntheticNetwork generate(const NetworkSpec& spec) {
  spec.validate();
  const int d = spec.dim;
  const int k = spec.num_cameras;
  Sampler rng(spec.seed);

  const int auto_rank = std::max(1, d / 6);
  const int global_rank = spec.shared_nuisance_rank > 0 ? spec.shared_nuisance_rank : auto_rank;
  const int camera_rank = spec.camera_nuisance_rank > 0 ? spec.camera_nuisance_rank : auto_rank;
  const Eigen::MatrixXd ug = rng.orthonormal(d, global_rank);
  const Eigen::MatrixXd global_nuisance = spec.shared_nuisance * ug * ug.transpose();

  std::vector<CameraModel> cams;
  for (int c = 0; c < k; ++c) {
    CameraModel cm;
    cm.id = camera_name(c);
    cm.distortion = Eigen::MatrixXd::Identity(d, d) +
                    spec.distortion / std::sqrt(static_cast<double>(d)) * rng.gaussian(d, d);
    cm.offset = kOffsetStd * rng.gaussian(d);
    const Eigen::MatrixXd uc = rng.orthonormal(d, camera_rank);
    cm.nuisance = sym(global_nuisance + spec.camera_nuisance * uc * uc.transpose() +
                      kIsotropicNuisanceVar * Eigen::MatrixXd::Identity(d, d));
    cams.push_back(std::move(cm));
  }

  const double var = spec.noise_scale * spec.noise_scale;
  double mean_sq = 0.0;
  for (const auto& cm : cams) {
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d) + var * cm.nuisance;
    mean_sq += (cm.distortion * cov * cm.distortion.transpose()).trace() + cm.offset.squaredNorm();
  }
  const double scale = 1.0 / std::sqrt(mean_sq / k);

  std::vector<Eigen::MatrixXd> chol;
  for (const auto& cm : cams) chol.push_back(Eigen::LLT<Eigen::MatrixXd>(cm.nuisance).matrixL());

  std::map<std::string, Eigen::VectorXd> latents;
  std::vector<FeatureRow> rows;
  rows.reserve(static_cast<std::size_t>(spec.persons_total) * k * spec.shots_per_camera);
  for (int p = 0; p < spec.persons_total; ++p) {
    const std::string pid = person_name(p, spec.persons_total);
    const Eigen::VectorXd u = rng.gaussian(d);
    latents.emplace(pid, u);
    for (int c = 0; c < k; ++c) {
      for (int s = 0; s < spec.shots_per_camera; ++s) {
        const Eigen::VectorXd noise = chol[static_cast<std::size_t>(c)] * rng.gaussian(d);
        const auto& cm = cams[static_cast<std::size_t>(c)];
        Eigen::VectorXd x = scale * (cm.distortion * (u + spec.noise_scale * noise) + cm.offset);
        rows.push_back({pid, cm.id, std::move(x)});
      }
    }
  }

  SyntheticNetwork net{FeatureTable(d, std::move(rows)), {}, {}, cams, scale, std::move(latents)};
  const std::set<int> outliers(spec.outlier_sources.begin(), spec.outlier_sources.end());
  const auto pairs = camera_pair_list(k);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& a = cams[static_cast<std::size_t>(pairs[i].first)];
    const auto& b = cams[static_cast<std::size_t>(pairs[i].second)];
    const Eigen::MatrixXd da = a.distortion - b.distortion;
    const Eigen::VectorXd dt = a.offset - b.offset;
    // Second moment of same-person cross-camera differences.
    Eigen::MatrixXd same = da * da.transpose() + dt * dt.transpose() +
                           var * (a.distortion * a.nuisance * a.distortion.transpose() +
                                  b.distortion * b.nuisance * b.distortion.transpose());
    same = sym(scale * scale * same);
    const double ridge = kPlantedRidge * std::max(same.trace() / d, 1e-12);
    Eigen::MatrixXd planted = (same + ridge * Eigen::MatrixXd::Identity(d, d)).inverse();
    planted = sym(planted);
    if (outliers.count(static_cast<int>(i))) {
      const Eigen::MatrixXd r = rng.orthonormal(d, d);
      planted = sym(r * planted * r.transpose());
    }
    net.camera_pairs.emplace_back(a.id, b.id);
    net.ground_truth.push_back(Metric::validated(planted));
  }
  return net;
}

Eigen::VectorXd invert_distortion(const SyntheticNetwork& net, const FeatureRow& row) {
  for (const auto& cm : net.cameras) {
    if (cm.id == row.camera_id) {
      return cm.distortion.partialPivLu().solve(row.feature / net.feature_scale - cm.offset);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown camera '" + row.camera_id + "'");
}

PcaResult pca_reduce(const FeatureTable& table, int out_dim, const FeatureTable& fit_on) {
  if (fit_on.empty()) throw Error(ErrorKind::InvalidArgument, "PCA needs data to fit on");
  if (table.dim() != fit_on.dim()) throw Error(ErrorKind::DimensionMismatch, "tables differ in dimension");
  const int d = fit_on.dim();
  if (out_dim < 1 || out_dim > d) throw Error(ErrorKind::InvalidArgument, "out_dim must be in [1, d]");

  const auto n = static_cast<Eigen::Index>(fit_on.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = fit_on.rows()[static_cast<std::size_t>(i)].feature.transpose();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  x.rowwise() -= mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(sv.size() ? sv(0) : 0.0, 1e-300) * std::max<Eigen::Index>(n, d);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  if (rank < out_dim) {
    throw Error(ErrorKind::RankDeficient, "data has rank " + std::to_string(rank) + " < out_dim " +
                                              std::to_string(out_dim));
  }
  const Eigen::MatrixXd projection = svd.matrixV().leftCols(out_dim).transpose();

  std::vector<FeatureRow> rows;
  rows.reserve(table.size());
  for (const auto& r : table.rows()) rows.push_back({r.person_id, r.camera_id, projection * (r.feature - mean)});
  return {FeatureTable(out_dim, std::move(rows)), projection, mean};
}

}  // namespace reidhtl
