#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reidhtl/io.hpp"
#include "reidhtl/types.hpp"

namespace reidhtl {

struct EvalReport {
  std::pair<std::string, std::string> camera_pair;
  /// cmc[k-1] is the rank-k accuracy, k = 1..G; cmc.back() == 1.
  std::vector<double> cmc;
  double rank1 = 0.0;
  double nauc = 0.0;
  int num_queries = 0;
  int num_gallery = 0;

  /// Rank-k accuracy, saturating at 1 beyond the gallery size.
  double rank(int k) const;
};

/// √((xi − xj)ᵀ M (xi − xj)); quadratic forms in [−1e-10, 0) are clamped to 0,
/// anything lower throws NegativeQuadraticForm.
double mahalanobis(const Metric& m, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj);

/// Cumulative matching over gallery identities. Gallery features are
/// averaged per identity; with `multi_query` the query features are averaged
/// per identity as well, otherwise every query row is a probe and the gallery
/// uses the first row of each identity. Ties break by identity string.
EvalReport cmc(const Metric& m, const FeatureTable& queries, const FeatureTable& gallery,
               bool multi_query = true);

/// Mean of rank-k accuracies across reports (each saturating at its own G).
EvalReport average_reports(const std::vector<EvalReport>& reports);

/// `rank,accuracy` rows plus `# nauc=<value>`.
io::CsvTable report_to_csv(const EvalReport& r);
EvalReport report_from_csv(const io::CsvTable& t);

}  // namespace reidhtl
