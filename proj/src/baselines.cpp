#include "reidhtl/baselines.hpp"

#include "reidhtl/errors.hpp"
#include "reidhtl/projections.hpp"

namespace reidhtl {

namespace {

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& sigma, std::optional<double> regularization) {
  const auto d = sigma.rows();
  const double eps = regularization ? *regularization : 1e-6 * sigma.trace() / static_cast<double>(d);
  const Eigen::MatrixXd reg = sigma + eps * Eigen::MatrixXd::Identity(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularScatter, "scatter matrix is singular even after regularization");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  if (!inv.allFinite()) throw Error(ErrorKind::SingularScatter, "scatter inverse is not finite");
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

Metric avg_source(const std::vector<Metric>& sources) {
  if (sources.empty()) throw Error(ErrorKind::InvalidArgument, "at least one source metric is required");
  const int d = sources.front().dim();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : sources) {
    if (s.dim() != d) throw Error(ErrorKind::DimensionMismatch, "source metrics differ in dimension");
    sum += s.matrix();
  }
  return Metric(sum / static_cast<double>(sources.size()));
}

Metric kissme(const PairData& pairs, std::optional<double> regularization) {
  if (regularization && !(*regularization >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "regularization must be nonnegative");
  }
  const Eigen::MatrixXd m = regularized_inverse(pairs.sigma_similar(), regularization) -
                            regularized_inverse(pairs.sigma_dissimilar(), regularization);
  return Metric(project_c2(Eigen::MatrixXd(0.5 * (m + m.transpose()))));
}

Metric euclidean(int dim) { return Metric::identity(dim); }

}  // namespace reidhtl
