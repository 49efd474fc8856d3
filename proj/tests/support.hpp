#pragma once

// Seeded generators and independent reference implementations shared by the
// unit and acceptance tests. Nothing here calls the library routine it checks.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reidhtl/types.hpp"

namespace testsupport {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Eigen::VectorXd vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd matrix(int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j) {
      for (int i = 0; i < r; ++i) m(i, j) = normal();
    }
    return m;
  }

  Eigen::MatrixXd symmetric(int d) {
    const Eigen::MatrixXd a = matrix(d, d);
    return 0.5 * (a + a.transpose());
  }

  Eigen::MatrixXd psd(int d, int rank = -1) {
    const Eigen::MatrixXd a = matrix(d, rank < 0 ? d : rank);
    return a * a.transpose() / static_cast<double>(d);
  }

  reidhtl::PairData pairs(int d, int n_s, int n_d) { return reidhtl::PairData(matrix(d, n_s), matrix(d, n_d)); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Cyclic Jacobi eigenvalue iteration for small symmetric matrices.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const auto n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  return {a.diagonal(), v};
}

/// Nearest PSD matrix through the Jacobi decomposition.
inline Eigen::MatrixXd psd_oracle(const Eigen::MatrixXd& m) {
  auto [w, v] = jacobi_eigen(0.5 * (m + m.transpose()));
  return v * w.cwiseMax(0.0).asDiagonal() * v.transpose();
}

inline double frob_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

/// Smallest ψ ≥ 0 with h(ψ) ≥ b for a nondecreasing h, by bisection.
template <class H>
double bisect_multiplier(H h, double b) {
  if (h(0.0) >= b) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (h(hi) < b) {
    hi *= 2.0;
    if (hi > 1e12) return hi;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) >= b ? hi : lo) = mid;
  }
  return hi;
}

/// Nearest point of {X : ⟨X, Σ_D⟩ ≥ b}, solved on the one-dimensional dual.
inline Eigen::MatrixXd c1_oracle(const Eigen::MatrixXd& m, const Eigen::MatrixXd& sd, double b) {
  const double psi = bisect_multiplier([&](double p) { return frob_inner(m + p * sd, sd); }, b);
  return m + psi * sd;
}

/// Nearest point of {X ⪰ 0, ⟨X, Σ_D⟩ ≥ b}: X(ψ) = Π_PSD(M + ψΣ_D) with the
/// smallest feasible ψ.
inline Eigen::MatrixXd c1_c2_oracle(const Eigen::MatrixXd& m, const Eigen::MatrixXd& sd, double b) {
  const double psi = bisect_multiplier([&](double p) { return frob_inner(psd_oracle(m + p * sd), sd); }, b);
  return psd_oracle(m + psi * sd);
}

/// Nearest point of {β ≥ 0, ‖β‖ ≤ 1} by enumerating which coordinates are zero.
inline Eigen::VectorXd c3_oracle(const Eigen::VectorXd& beta) {
  const auto n = beta.size();
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << n); ++mask) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask & (1L << i)) y(i) = beta(i);
    }
    if (y.norm() > 1.0) y /= y.norm();
    if ((y.array() < 0.0).any()) continue;
    const double dist = (y - beta).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = y;
    }
  }
  return best;
}

/// Clip-after-rescale weight projection, spelled out coordinate by coordinate.
inline Eigen::VectorXd eq6_formula(const Eigen::VectorXd& beta) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) sq += beta(i) * beta(i);
  const double denom = std::max(1.0, std::sqrt(sq));
  Eigen::VectorXd out(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) out(i) = std::max(0.0, beta(i) / denom);
  return out;
}

/// Random point of C1 ∩ C2: a PSD matrix pushed along Σ_D (stays PSD).
inline Eigen::MatrixXd random_feasible_metric(Rng& rng, const reidhtl::PairData& pairs, double b) {
  const int d = pairs.dim();
  const Eigen::MatrixXd& sd = pairs.sigma_dissimilar();
  Eigen::MatrixXd x = rng.psd(d, rng.integer(1, d)) * rng.uniform(0.01, 3.0);
  const double value = frob_inner(x, sd);
  if (value < b) x += (b - value) / sd.squaredNorm() * sd;
  return x;
}

inline Eigen::VectorXd random_feasible_beta(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::abs(rng.normal());
  const double r = std::pow(rng.uniform(0.0, 1.0), 1.0 / n);
  return v.norm() > 0 ? Eigen::VectorXd(v / v.norm() * r) : v;
}

/// Direct objective: per-pair sum plus the explicit Frobenius regularizer.
inline double objective_oracle(const Eigen::MatrixXd& m, const Eigen::VectorXd& beta,
                               const std::vector<Eigen::MatrixXd>& sources, const reidhtl::PairData& pairs,
                               double lambda) {
  double first = 0.0;
  for (Eigen::Index j = 0; j < pairs.similar_diffs().cols(); ++j) {
    const Eigen::VectorXd x = pairs.similar_diffs().col(j);
    first += x.dot(m * x);
  }
  first /= pairs.n_similar();
  Eigen::MatrixXd r = m;
  for (std::size_t j = 0; j < sources.size(); ++j) r -= beta(static_cast<Eigen::Index>(j)) * sources[j];
  double reg = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.cols(); ++k) reg += r(i, k) * r(i, k);
  }
  return first + lambda * reg;
}

/// CMC by sorting the full probe × gallery distance matrix.
inline std::vector<double> cmc_oracle(const Eigen::MatrixXd& m,
                                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& probes,
                                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& gallery) {
  const std::size_t g = gallery.size();
  std::vector<double> hits(g, 0.0);
  for (const auto& [pid, pf] : probes) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [gid, gf] : gallery) {
      const Eigen::VectorXd diff = pf - gf;
      ranked.emplace_back(std::sqrt(std::max(0.0, diff.dot(m * diff))), gid);
    }
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t k = 0; k < g; ++k) {
      if (ranked[k].second == pid) {
        for (std::size_t j = k; j < g; ++j) hits[j] += 1.0;
        break;
      }
    }
  }
  for (auto& h : hits) h /= static_cast<double>(probes.size());
  return hits;
}

/// Per-identity mean features of a table.
inline std::vector<std::pair<std::string, Eigen::VectorXd>> identity_means(const reidhtl::FeatureTable& t) {
  std::map<std::string, std::pair<Eigen::VectorXd, int>> acc;
  for (const auto& r : t.rows()) {
    auto it = acc.find(r.person_id);
    if (it == acc.end()) {
      acc.emplace(r.person_id, std::make_pair(r.feature, 1));
    } else {
      it->second.first += r.feature;
      ++it->second.second;
    }
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> out;
  for (auto& [id, sum] : acc) out.emplace_back(id, sum.first / sum.second);
  return out;
}

/// Random table: `persons` identities, `shots` rows each, in one camera.
inline reidhtl::FeatureTable random_table(Rng& rng, const std::string& camera, int persons, int shots, int d,
                                          double spread = 1.0) {
  std::vector<reidhtl::FeatureRow> rows;
  for (int p = 0; p < persons; ++p) {
    const Eigen::VectorXd centre = rng.vector(d);
    for (int s = 0; s < shots; ++s) {
      rows.push_back({"id" + std::to_string(p), camera, centre + spread * rng.vector(d)});
    }
  }
  return reidhtl::FeatureTable(d, std::move(rows));
}

}  // namespace testsupport
