#include "reidhtl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reidhtl/errors.hpp"
#include "reidhtl/projections.hpp"

namespace reidhtl {

namespace {

void check_dim(int d, const PairData& pairs) {
  if (d != pairs.dim()) throw Error(ErrorKind::DimensionMismatch, "metric and pairs differ in dimension");
}

double pair_total(const PairData& pairs) { return static_cast<double>(pairs.n_similar() + pairs.n_dissimilar()); }

}  // namespace

double TheoryLoss::zeta_similar(const PairData& pairs) const {
  return 1.0 + static_cast<double>(pairs.n_dissimilar()) / pairs.n_similar();
}

double TheoryLoss::zeta_dissimilar(const PairData& pairs) const {
  if (pairs.n_dissimilar() == 0) return 0.0;
  return -mu_star * (1.0 + static_cast<double>(pairs.n_similar()) / pairs.n_dissimilar());
}

double TheoryLoss::gamma_offset(const PairData& pairs) const { return mu_star * b * pair_total(pairs); }

double theory_loss(const Eigen::MatrixXd& m, const PairData& pairs, const TheoryLoss& tl) {
  check_dim(static_cast<int>(m.rows()), pairs);
  const double similar = m.cwiseProduct(pairs.sigma_similar()).sum();
  return similar + tl.mu_star * (tl.b - dissimilar_mean_distance(m, pairs));
}

double theory_loss(const Metric& m, const PairData& pairs, const TheoryLoss& tl) {
  return theory_loss(m.matrix(), pairs, tl);
}

double theory_loss_pairwise(const Metric& m, const PairData& pairs, const TheoryLoss& tl) {
  check_dim(m.dim(), pairs);
  const double n2 = pair_total(pairs);
  const Eigen::MatrixXd& mm = m.matrix();
  double sum = 0.0;
  const double zs = tl.zeta_similar(pairs);
  for (Eigen::Index j = 0; j < pairs.similar_diffs().cols(); ++j) {
    const auto x = pairs.similar_diffs().col(j);
    sum += zs * x.dot(mm * x);
  }
  const double zd = tl.zeta_dissimilar(pairs);
  for (Eigen::Index j = 0; j < pairs.dissimilar_diffs().cols(); ++j) {
    const auto x = pairs.dissimilar_diffs().col(j);
    sum += zd * x.dot(mm * x);
  }
  return sum / n2 + tl.gamma_offset(pairs) / n2;
}

double extract_mu_star(const SolveResult& r, const PairData& pairs, const SolverConfig& cfg) {
  const double value = dissimilar_mean_distance(r.metric.matrix(), pairs);
  if (value > cfg.b + cfg.inner_tol) return 0.0;
  if (!(r.final_alpha > 0.0)) return 0.0;
  return std::max(0.0, r.final_psi / r.final_alpha);
}

double lipschitz_k(const PairData& pairs, double mu_star) {
  return 2.0 * std::max(1.0, mu_star) * pairs.max_diff_sq_norm();
}

double theorem1_bound(double k, double lambda, int n) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "average bound needs lambda > 0");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "average bound needs n >= 1");
  return 8.0 * k * k / (lambda * n);
}

double theorem2_coefficient(const std::vector<Metric>& sources, const WeightVector& beta,
                            const PairData& pairs, const TheoryLoss& tl, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "stability coefficient needs lambda > 0");
  const Eigen::MatrixXd ms = combine_sources(sources, beta);
  const double lt = std::max(0.0, theory_loss(ms, pairs, tl));
  return std::sqrt(lt / lambda) + ms.norm();
}

double theorem2_gap(const Metric& m, const WeightVector& beta, const std::vector<Metric>& sources,
                    const PairData& pairs, const TheoryLoss& tl, double lambda, int n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must be in (0, 1)");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  check_dim(m.dim(), pairs);
  for (const auto& s : sources) {
    if (s.dim() != m.dim()) throw Error(ErrorKind::DimensionMismatch, "source metric dimension differs");
  }
  return theorem2_coefficient(sources, beta, pairs, tl, lambda) * std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

io::CsvTable bound_rows_to_csv(const std::vector<BoundCheckRow>& rows, const std::vector<std::string>& comments) {
  io::CsvTable t;
  t.header = {"seed", "n", "lhs", "rhs", "pass"};
  t.comments = comments;
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.seed), std::to_string(r.n), io::format_double(r.lhs),
                      io::format_double(r.rhs), r.pass ? "1" : "0"});
  }
  return t;
}

std::vector<BoundCheckRow> bound_rows_from_csv(const io::CsvTable& t) {
  const auto cs = t.column("seed"), cn = t.column("n"), cl = t.column("lhs"), cr = t.column("rhs"),
             cp = t.column("pass");
  std::vector<BoundCheckRow> out;
  for (const auto& row : t.rows) {
    BoundCheckRow r;
    try {
      r.seed = std::stoull(row.at(cs));
      r.n = std::stoi(row.at(cn));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad seed or n in bound report");
    }
    r.lhs = io::parse_double(row.at(cl));
    r.rhs = io::parse_double(row.at(cr));
    if (row.at(cp) != "0" && row.at(cp) != "1") throw Error(ErrorKind::ParseError, "pass must be 0 or 1");
    r.pass = row.at(cp) == "1";
    out.push_back(r);
  }
  return out;
}

}  // namespace reidhtl
