#include "reidhtl/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include "reidhtl/errors.hpp"

namespace reidhtl {

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(m(i, j)));
      if (!(std::abs(m(i, j) - m(j, i)) <= tol * scale)) return false;
    }
  }
  return true;
}

Metric::Metric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "metric must be a non-empty square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "metric has non-finite entries");
  }
  if (!is_symmetric(m)) {
    throw Error(ErrorKind::NotSymmetric, "metric is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

Metric Metric::validated(const Eigen::MatrixXd& m) {
  Metric out(m);
  if (!out.is_psd()) {
    throw Error(ErrorKind::NotPsd,
                "metric has eigenvalue " + std::to_string(out.min_eigenvalue()));
  }
  return out;
}

Metric Metric::identity(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  return Metric(Eigen::MatrixXd::Identity(dim, dim));
}

Metric Metric::zero(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  return Metric(Eigen::MatrixXd::Zero(dim, dim));
}

double Metric::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool Metric::is_psd(double rel_tol) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev(0) >= -rel_tol * scale;
}

WeightVector::WeightVector(Eigen::VectorXd w) : w_(std::move(w)) {
  if (!w_.allFinite()) throw Error(ErrorKind::InvalidArgument, "weights must be finite");
}

WeightVector WeightVector::uniform(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one weight");
  return WeightVector(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
}

bool WeightVector::in_unit_orthant_ball() const {
  return (w_.size() == 0 || w_.minCoeff() >= -kNonnegTol) && w_.norm() <= 1.0 + kNormTol;
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& columns) {
  const Eigen::Index d = columns.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  if (columns.cols() == 0) return s;
  s.selfadjointView<Eigen::Lower>().rankUpdate(columns, 1.0 / static_cast<double>(columns.cols()));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

PairData::PairData(Eigen::MatrixXd similar, Eigen::MatrixXd dissimilar)
    : similar_(std::move(similar)), dissimilar_(std::move(dissimilar)) {
  if (similar_.cols() < 1) throw Error(ErrorKind::NoSimilarPairs, "no similar pairs");
  if (similar_.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "zero-dimensional diffs");
  if (dissimilar_.cols() == 0) dissimilar_.resize(similar_.rows(), 0);
  if (dissimilar_.rows() != similar_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "similar and dissimilar diffs differ in dimension");
  }
  sigma_s_ = scatter(similar_);
  sigma_d_ = scatter(dissimilar_);
}

PairData PairData::from_diffs(const std::vector<Eigen::VectorXd>& similar,
                              const std::vector<Eigen::VectorXd>& dissimilar) {
  if (similar.empty()) throw Error(ErrorKind::NoSimilarPairs, "no similar pairs");
  const Eigen::Index d = similar.front().size();
  auto stack = [d](const std::vector<Eigen::VectorXd>& v) {
    Eigen::MatrixXd out(d, static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].size() != d) throw Error(ErrorKind::DimensionMismatch, "diff length differs");
      out.col(static_cast<Eigen::Index>(i)) = v[i];
    }
    return out;
  };
  return PairData(stack(similar), stack(dissimilar));
}

double PairData::max_diff_sq_norm() const {
  double m = similar_.colwise().squaredNorm().maxCoeff();
  if (dissimilar_.cols() > 0) m = std::max(m, dissimilar_.colwise().squaredNorm().maxCoeff());
  return m;
}

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
    }
  };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be nonnegative");
  }
  positive(b, "b");
  positive(alpha, "alpha");
  positive(gamma, "gamma");
  positive(outer_tol, "outer_tol");
  positive(inner_tol, "inner_tol");
  if (max_outer_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_outer_iters must be positive");
  if (max_inner_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_inner_iters must be positive");
}

FeatureTable::FeatureTable(int dim, std::vector<FeatureRow> rows) : dim_(dim), rows_(std::move(rows)) {
  if (dim_ < 1) throw Error(ErrorKind::InvalidArgument, "feature dimension must be positive");
  for (const auto& r : rows_) {
    if (r.feature.size() != dim_) {
      throw Error(ErrorKind::DimensionMismatch,
                  "feature for person '" + r.person_id + "' has length " +
                      std::to_string(r.feature.size()) + ", expected " + std::to_string(dim_));
    }
    if (r.person_id.empty() || r.camera_id.empty()) {
      throw Error(ErrorKind::InvalidArgument, "person_id and camera_id must be nonempty");
    }
  }
}

FeatureTable FeatureTable::camera(std::string_view camera_id) const {
  std::vector<FeatureRow> out;
  for (const auto& r : rows_) {
    if (r.camera_id == camera_id) out.push_back(r);
  }
  return FeatureTable(dim_, std::move(out));
}

FeatureTable FeatureTable::with_persons(const std::vector<std::string>& person_ids) const {
  const std::set<std::string> keep(person_ids.begin(), person_ids.end());
  std::vector<FeatureRow> out;
  for (const auto& r : rows_) {
    if (keep.count(r.person_id)) out.push_back(r);
  }
  return FeatureTable(dim_, std::move(out));
}

std::vector<std::string> FeatureTable::camera_ids() const {
  std::set<std::string> s;
  for (const auto& r : rows_) s.insert(r.camera_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> FeatureTable::person_ids() const {
  std::set<std::string> s;
  for (const auto& r : rows_) s.insert(r.person_id);
  return {s.begin(), s.end()};
}

PairData build_pair_data(const FeatureTable& target, const FeatureTable& source, bool balance,
                         std::uint64_t seed) {
  if (target.empty() || source.empty()) {
    throw Error(ErrorKind::InvalidArgument, "both camera slices must be nonempty");
  }
  if (target.dim() != source.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "camera slices differ in feature dimension");
  }
  const int d = target.dim();
  const auto& t = target.rows();
  const auto& s = source.rows();

  std::vector<std::pair<std::size_t, std::size_t>> sim, dis;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      (t[i].person_id == s[j].person_id ? sim : dis).emplace_back(i, j);
    }
  }
  if (sim.empty()) {
    throw Error(ErrorKind::NoSimilarPairs, "camera slices share no person identity");
  }
  if (balance && dis.size() > sim.size()) {
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    kept.reserve(sim.size());
    std::mt19937_64 rng(seed);
    std::sample(dis.begin(), dis.end(), std::back_inserter(kept), sim.size(), rng);
    dis = std::move(kept);
  }

  auto materialize = [&](const std::vector<std::pair<std::size_t, std::size_t>>& idx) {
    Eigen::MatrixXd out(d, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.col(static_cast<Eigen::Index>(k)) = t[idx[k].first].feature - s[idx[k].second].feature;
    }
    return out;
  };
  return PairData(materialize(sim), materialize(dis));
}

}  // namespace reidhtl
