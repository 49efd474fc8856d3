#include "reidhtl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "reidhtl/errors.hpp"

namespace reidhtl {

namespace {

constexpr double kNegativeFormTol = 1e-10;

struct Probe {
  std::string id;
  Eigen::VectorXd feature;
};

// Sorted by identity.
std::vector<Probe> per_identity(const FeatureTable& t, bool average) {
  std::map<std::string, std::pair<Eigen::VectorXd, int>> acc;
  for (const auto& r : t.rows()) {
    auto it = acc.find(r.person_id);
    if (it == acc.end()) {
      acc.emplace(r.person_id, std::make_pair(r.feature, 1));
    } else if (average) {
      it->second.first += r.feature;
      ++it->second.second;
    }
  }
  std::vector<Probe> out;
  out.reserve(acc.size());
  for (auto& [id, v] : acc) out.push_back({id, v.first / static_cast<double>(v.second)});
  return out;
}

double quadratic_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& diff) {
  const double q = diff.dot(m * diff);
  if (q < -kNegativeFormTol) {
    throw Error(ErrorKind::NegativeQuadraticForm, "quadratic form " + std::to_string(q) + " is negative");
  }
  return std::max(q, 0.0);
}

std::string camera_of(const FeatureTable& t) { return t.empty() ? std::string() : t.rows().front().camera_id; }

}  // namespace

double EvalReport::rank(int k) const {
  if (cmc.empty() || k < 1) return 0.0;
  return cmc[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(cmc.size())) - 1)];
}

double mahalanobis(const Metric& m, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
  if (xi.size() != m.dim() || xj.size() != m.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "feature and metric dimensions differ");
  }
  return std::sqrt(quadratic_form(m.matrix(), xi - xj));
}

EvalReport cmc(const Metric& m, const FeatureTable& queries, const FeatureTable& gallery, bool multi_query) {
  if (queries.dim() != m.dim() || gallery.dim() != m.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "feature and metric dimensions differ");
  }
  const auto gal = per_identity(gallery, multi_query);
  if (gal.size() < 2) throw Error(ErrorKind::EmptyGallery, "gallery needs at least two identities");
  if (queries.empty()) throw Error(ErrorKind::InvalidArgument, "no queries");

  std::vector<Probe> probes;
  if (multi_query) {
    probes = per_identity(queries, true);
  } else {
    for (const auto& r : queries.rows()) probes.push_back({r.person_id, r.feature});
  }

  std::map<std::string, std::size_t> gallery_index;
  for (std::size_t g = 0; g < gal.size(); ++g) gallery_index.emplace(gal[g].id, g);

  const std::size_t num_gallery = gal.size();
  std::vector<int> hits_at_rank(num_gallery, 0);
  std::vector<double> dist(num_gallery);
  for (const auto& p : probes) {
    auto it = gallery_index.find(p.id);
    if (it == gallery_index.end()) {
      throw Error(ErrorKind::QueryIdentityMissing, "query identity '" + p.id + "' is not in the gallery");
    }
    for (std::size_t g = 0; g < num_gallery; ++g) dist[g] = quadratic_form(m.matrix(), p.feature - gal[g].feature);
    const std::size_t truth = it->second;
    std::size_t ahead = 0;
    for (std::size_t g = 0; g < num_gallery; ++g) {
      // Gallery is sorted by id, so g < truth means a smaller identity string.
      if (dist[g] < dist[truth] || (dist[g] == dist[truth] && g < truth)) ++ahead;
    }
    ++hits_at_rank[ahead];
  }

  EvalReport r;
  r.camera_pair = {camera_of(queries), camera_of(gallery)};
  r.num_queries = static_cast<int>(probes.size());
  r.num_gallery = static_cast<int>(num_gallery);
  r.cmc.resize(num_gallery);
  int cumulative = 0;
  double area = 0.0;
  for (std::size_t k = 0; k < num_gallery; ++k) {
    cumulative += hits_at_rank[k];
    r.cmc[k] = static_cast<double>(cumulative) / static_cast<double>(probes.size());
    area += r.cmc[k];
  }
  r.cmc.back() = 1.0;
  r.rank1 = r.cmc.front();
  r.nauc = area / static_cast<double>(num_gallery);
  return r;
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::InvalidArgument, "no reports to average");
  std::size_t g = 0;
  for (const auto& r : reports) g = std::max(g, r.cmc.size());
  EvalReport out;
  out.camera_pair = {"all", "all"};
  out.cmc.assign(g, 0.0);
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < g; ++k) out.cmc[k] += r.rank(static_cast<int>(k) + 1);
    out.nauc += r.nauc;
    out.num_queries += r.num_queries;
    out.num_gallery = std::max(out.num_gallery, r.num_gallery);
  }
  const double n = static_cast<double>(reports.size());
  for (auto& v : out.cmc) v /= n;
  out.cmc.back() = 1.0;
  out.rank1 = out.cmc.front();
  out.nauc /= n;
  return out;
}

io::CsvTable report_to_csv(const EvalReport& r) {
  io::CsvTable t{{"rank", "accuracy"}, {}, {}};
  for (std::size_t k = 0; k < r.cmc.size(); ++k) {
    t.rows.push_back({std::to_string(k + 1), io::format_double(r.cmc[k])});
  }
  t.comments.push_back("nauc=" + io::format_double(r.nauc));
  return t;
}

EvalReport report_from_csv(const io::CsvTable& t) {
  EvalReport r;
  const auto ca = t.column("accuracy");
  for (const auto& row : t.rows) r.cmc.push_back(io::parse_double(row[ca]));
  if (r.cmc.empty()) throw Error(ErrorKind::ParseError, "report has no ranks");
  r.rank1 = r.cmc.front();
  r.num_gallery = static_cast<int>(r.cmc.size());
  for (const auto& c : t.comments) {
    if (c.rfind("nauc=", 0) == 0) r.nauc = io::parse_double(c.substr(5));
  }
  return r;
}

}  // namespace reidhtl
