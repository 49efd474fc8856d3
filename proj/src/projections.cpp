#include "reidhtl/projections.hpp"

#include <algorithm>
#include <cmath>

#include "reidhtl/errors.hpp"

namespace reidhtl {

namespace {

void check_dims(const Eigen::MatrixXd& m, const PairData& pairs) {
  if (m.rows() != pairs.dim() || m.cols() != pairs.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "metric and pair data differ in dimension");
  }
}

// Π_C1 on a raw matrix; returns the multiplier through `psi`.
Eigen::MatrixXd c1_step(const Eigen::MatrixXd& m, const PairData& pairs, double b, double& psi) {
  psi = c1_multiplier(m, pairs, b);
  if (psi == 0.0) return m;
  return m + psi * pairs.sigma_dissimilar();
}

}  // namespace

double dissimilar_mean_distance(const Eigen::MatrixXd& m, const PairData& pairs) {
  check_dims(m, pairs);
  return m.cwiseProduct(pairs.sigma_dissimilar()).sum();
}

double c1_multiplier(const Eigen::MatrixXd& m, const PairData& pairs, double b) {
  const double norm_sq = pairs.sigma_dissimilar().squaredNorm();
  if (!(norm_sq > 0.0)) {
    throw Error(ErrorKind::DegenerateScatter,
                "dissimilar scatter is zero; the dissimilarity constraint cannot be met");
  }
  return std::max(0.0, (b - dissimilar_mean_distance(m, pairs)) / norm_sq);
}

Metric project_c1(const Metric& m, const PairData& pairs, double b) {
  double psi = 0.0;
  return Metric(c1_step(m.matrix(), pairs, b, psi));
}

Eigen::MatrixXd project_c2(const Eigen::MatrixXd& m) {
  if (!is_symmetric(m)) throw Error(ErrorKind::NotSymmetric, "cannot take the PSD part of a non-symmetric matrix");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev(0) >= 0.0) return sym;
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd out = v * ev.cwiseMax(0.0).asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Metric project_c2(const Metric& m) { return Metric(project_c2(m.matrix())); }

namespace {

// In index order, so the projection is reproducible bit for bit.
double sequential_norm(const Eigen::VectorXd& v) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sq += v(i) * v(i);
  return std::sqrt(sq);
}

}  // namespace

WeightVector project_c3(const WeightVector& beta, BetaProjection variant) {
  const Eigen::VectorXd& b = beta.values();
  switch (variant) {
    case BetaProjection::PaperEq6: {
      const double scale = std::max(1.0, sequential_norm(b));
      return WeightVector((b / scale).cwiseMax(0.0));
    }
    case BetaProjection::ExactEuclidean: {
      Eigen::VectorXd c = b.cwiseMax(0.0);
      const double n = sequential_norm(c);
      if (n > 1.0) c /= n;
      return WeightVector(c);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown beta projection");
}

double c1_violation(const Eigen::MatrixXd& m, const PairData& pairs, double b) {
  return std::max(0.0, b - dissimilar_mean_distance(m, pairs));
}

double psd_violation(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return std::max(0.0, -es.eigenvalues()(0));
}

IntersectionProjection project_c1_c2(const Metric& m, const PairData& pairs, const SolverConfig& cfg) {
  check_dims(m.matrix(), pairs);
  if (!(pairs.sigma_dissimilar().squaredNorm() > 0.0)) {
    throw Error(ErrorKind::DegenerateScatter,
                "dissimilar scatter is zero; the dissimilarity constraint cannot be met");
  }
  const double tol = cfg.inner_tol;
  auto feasible = [&](const Eigen::MatrixXd& x) {
    return c1_violation(x, pairs, cfg.b) <= tol && psd_violation(x) <= tol;
  };

  Eigen::MatrixXd x = m.matrix();
  if (feasible(x)) return {Metric(x), 0, true, 0.0};

  double psi_total = 0.0;
  if (cfg.inner_projection == InnerProjection::PlainAlternation) {
    for (int it = 1; it <= cfg.max_inner_iters; ++it) {
      double psi = 0.0;
      x = project_c2(c1_step(x, pairs, cfg.b, psi));
      psi_total += psi;
      if (feasible(x)) return {Metric(x), it, true, psi_total};
    }
    return {Metric(x), cfg.max_inner_iters, false, psi_total};
  }

  // Dykstra: p, q are the correction terms for C1 and C2. C1's correction
  // is always a multiple of Σ_D, so it is carried as a scalar.
  double p_coef = 0.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (int it = 1; it <= cfg.max_inner_iters; ++it) {
    double psi = 0.0;
    const Eigen::MatrixXd shifted = x - p_coef * pairs.sigma_dissimilar();
    const Eigen::MatrixXd y = c1_step(shifted, pairs, cfg.b, psi);
    p_coef = psi;
    const Eigen::MatrixXd prev = x;
    x = project_c2(y + q);
    q = y + q - x;
    psi_total = psi;
    const double step = (x - prev).norm();
    if (feasible(x) && step <= tol * std::max(1.0, x.norm())) {
      return {Metric(x), it, true, psi_total};
    }
  }
  return {Metric(x), cfg.max_inner_iters, false, psi_total};
}

}  // namespace reidhtl
