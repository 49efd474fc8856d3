#include "reidhtl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reidhtl/errors.hpp"
#include "reidhtl/projections.hpp"

namespace reidhtl {

namespace {

constexpr int kMaxHalvings = 40;

void check_sources(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources) {
  if (static_cast<int>(sources.size()) != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one weight per source metric required");
  }
  for (const auto& s : sources) {
    if (s.dim() != m.dim()) throw Error(ErrorKind::DimensionMismatch, "source metric dimension differs");
  }
}

// Accept when the objective did not go up, up to rounding.
bool not_worse(double candidate, double current) {
  return candidate <= current + 1e-12 * std::max(1.0, std::abs(current));
}

// Finite with a finite squared norm, so downstream products cannot overflow.
bool representable(const Eigen::MatrixXd& x) { return x.allFinite() && std::isfinite(x.squaredNorm()); }

}  // namespace

Eigen::MatrixXd combine_sources(const std::vector<Metric>& sources, const WeightVector& beta) {
  if (sources.empty()) throw Error(ErrorKind::InvalidArgument, "no source metrics");
  if (static_cast<int>(sources.size()) != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one weight per source metric required");
  }
  const int d = sources.front().dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < sources.size(); ++j) {
    if (sources[j].dim() != d) throw Error(ErrorKind::DimensionMismatch, "source metric dimension differs");
    out += beta[static_cast<int>(j)] * sources[j].matrix();
  }
  return out;
}

double objective(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                 const PairData& pairs, double lambda) {
  if (m.dim() != pairs.dim()) throw Error(ErrorKind::DimensionMismatch, "metric and pairs differ in dimension");
  check_sources(m, beta, sources);
  const double similar_term = m.matrix().cwiseProduct(pairs.sigma_similar()).sum();
  if (lambda == 0.0) return similar_term;
  return similar_term + lambda * (m.matrix() - combine_sources(sources, beta)).squaredNorm();
}

Eigen::MatrixXd grad_m(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                       const PairData& pairs, double lambda) {
  if (m.dim() != pairs.dim()) throw Error(ErrorKind::DimensionMismatch, "metric and pairs differ in dimension");
  check_sources(m, beta, sources);
  if (lambda == 0.0) return pairs.sigma_similar();
  return pairs.sigma_similar() + 2.0 * lambda * (m.matrix() - combine_sources(sources, beta));
}

Eigen::VectorXd grad_beta(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                          double lambda) {
  check_sources(m, beta, sources);
  const int n = beta.size();
  Eigen::VectorXd a(n);
  const Eigen::MatrixXd combined = combine_sources(sources, beta);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& mi = sources[static_cast<std::size_t>(i)].matrix();
    const Eigen::MatrixXd others = combined - beta[i] * mi;
    a(i) = 2.0 * lambda * beta[i] * mi.squaredNorm() -
           2.0 * lambda * mi.cwiseProduct(m.matrix() - others).sum();
  }
  return a;
}

std::pair<double, double> lipschitz_step_sizes(const std::vector<Metric>& sources, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "Lipschitz steps need lambda > 0");
  if (sources.empty()) throw Error(ErrorKind::InvalidArgument, "no source metrics");
  const auto n = static_cast<Eigen::Index>(sources.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) = sources[static_cast<std::size_t>(i)].matrix().cwiseProduct(
                                    sources[static_cast<std::size_t>(j)].matrix()).sum();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double top = std::max(es.eigenvalues()(n - 1), std::numeric_limits<double>::min());
  return {1.0 / (2.0 * lambda), 1.0 / (2.0 * lambda * top)};
}

Metric default_initial_metric(const PairData& pairs, double b) {
  const double mean_sq = pairs.sigma_dissimilar().trace();
  if (!(mean_sq > 0.0)) {
    throw Error(ErrorKind::DegenerateScatter, "dissimilar diffs are all zero");
  }
  return Metric(std::max(1.0, b / mean_sq) * Eigen::MatrixXd::Identity(pairs.dim(), pairs.dim()));
}

SolveResult solve(const std::vector<Metric>& sources, const PairData& pairs, const SolverConfig& cfg,
                  const std::optional<Metric>& init_m, const std::optional<WeightVector>& init_beta) {
  cfg.validate();
  if (sources.empty()) throw Error(ErrorKind::InvalidArgument, "at least one source metric is required");
  for (const auto& s : sources) {
    if (s.dim() != pairs.dim()) throw Error(ErrorKind::DimensionMismatch, "source metric dimension differs");
  }
  const int n_sources = static_cast<int>(sources.size());

  bool inner_cap_hit = false;
  Metric m = default_initial_metric(pairs, cfg.b);
  if (init_m) {
    if (init_m->dim() != pairs.dim()) throw Error(ErrorKind::DimensionMismatch, "initial metric dimension differs");
    auto p = project_c1_c2(*init_m, pairs, cfg);
    inner_cap_hit |= !p.converged;
    m = p.metric;
  }
  WeightVector beta = WeightVector::uniform(n_sources);
  if (init_beta) {
    if (init_beta->size() != n_sources) throw Error(ErrorKind::DimensionMismatch, "initial weights length differs");
    beta = project_c3(*init_beta, cfg.beta_projection);
  }

  auto f_of = [&](const Metric& mm, const WeightVector& bb) {
    return objective(mm, bb, sources, pairs, cfg.lambda);
  };

  double alpha = cfg.alpha;
  double gamma = cfg.gamma;
  double f = f_of(m, beta);
  if (!std::isfinite(f)) throw Error(ErrorKind::NonFiniteObjective, "objective at the initial point is not finite");

  SolveResult result{m, beta, {{0, f}}, false, 0, 0.0, alpha, false};
  Metric best_m = m;
  WeightVector best_beta = beta;
  double best_f = f;
  double psi = 0.0, psi_alpha = alpha, best_psi = 0.0, best_alpha = alpha;

  for (int k = 1; k <= cfg.max_outer_iters; ++k) {
    // M block.
    const Eigen::MatrixXd g = grad_m(m, beta, sources, pairs, cfg.lambda);
    const double alpha_before = alpha;
    bool m_accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      const Eigen::MatrixXd step = m.matrix() - alpha * g;
      if (!representable(step)) {
        if (!cfg.backtracking) throw Error(ErrorKind::NonFiniteObjective, "objective diverged; alpha is too large");
        alpha *= 0.5;
        continue;
      }
      auto p = project_c1_c2(Metric(step), pairs, cfg);
      const double fm = f_of(p.metric, beta);
      const bool finite = std::isfinite(fm);
      if (!finite && !cfg.backtracking) {
        throw Error(ErrorKind::NonFiniteObjective, "objective diverged; alpha is too large");
      }
      if (finite && (!cfg.backtracking || not_worse(fm, f))) {
        inner_cap_hit |= !p.converged;
        m = p.metric;
        f = fm;
        psi = p.psi;
        psi_alpha = alpha;
        m_accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!m_accepted) alpha = alpha_before;

    // β block.
    const Eigen::VectorXd gb = grad_beta(m, beta, sources, cfg.lambda);
    const double gamma_before = gamma;
    bool beta_accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      const Eigen::VectorXd bstep = beta.values() - gamma * gb;
      if (!representable(bstep)) {
        if (!cfg.backtracking) throw Error(ErrorKind::NonFiniteObjective, "objective diverged; gamma is too large");
        gamma *= 0.5;
        continue;
      }
      WeightVector cand = project_c3(WeightVector(bstep), cfg.beta_projection);
      const double fb = f_of(m, cand);
      const bool finite = std::isfinite(fb);
      if (!finite && !cfg.backtracking) {
        throw Error(ErrorKind::NonFiniteObjective, "objective diverged; gamma is too large");
      }
      if (finite && (!cfg.backtracking || not_worse(fb, f))) {
        beta = cand;
        beta_accepted = true;
        break;
      }
      gamma *= 0.5;
    }
    if (!beta_accepted) gamma = gamma_before;

    const double f_prev = result.objective_trace.back().second;
    const double f_new = f_of(m, beta);
    if (!std::isfinite(f_new)) throw Error(ErrorKind::NonFiniteObjective, "objective is not finite");
    result.objective_trace.emplace_back(k, f_new);
    result.iterations = k;
    if (f_new <= best_f) {
      best_f = f_new;
      best_m = m;
      best_beta = beta;
      best_psi = psi;
      best_alpha = psi_alpha;
    }
    f = f_new;
    if (std::abs(f_new - f_prev) <= cfg.outer_tol * std::abs(f_prev)) {
      result.converged = true;
      break;
    }
  }

  if (best_f < f) result.objective_trace.emplace_back(result.iterations, best_f);
  result.metric = best_m;
  result.weights = best_beta;
  result.final_psi = best_psi;
  result.final_alpha = best_alpha;
  result.inner_cap_hit = inner_cap_hit;
  return result;
}

}  // namespace reidhtl
