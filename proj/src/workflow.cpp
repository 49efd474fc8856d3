#include "reidhtl/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <set>

#include "reidhtl/baselines.hpp"
#include "reidhtl/errors.hpp"

namespace reidhtl {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_string(PersonRole r) {
  switch (r) {
    case PersonRole::Test: return "test";
    case PersonRole::SourceOnly: return "source_only";
    case PersonRole::Labeled: return "labeled";
    case PersonRole::Unlabeled: return "unlabeled";
  }
  return "unknown";
}

PersonRole parse_role(const std::string& s) {
  for (auto r : {PersonRole::Test, PersonRole::SourceOnly, PersonRole::Labeled, PersonRole::Unlabeled}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorKind::ParseError, "unknown person role '" + s + "'");
}

void SplitSpec::validate() const {
  auto fraction = [](double v, const char* name, bool allow_zero) {
    if (!std::isfinite(v) || v > 1.0 || v < 0.0 || (!allow_zero && v == 0.0)) {
      throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
    }
  };
  fraction(test_fraction, "test fraction", false);
  if (test_fraction >= 1.0) throw Error(ErrorKind::InvalidArgument, "test fraction must leave training persons");
  fraction(overlap_fraction, "overlap fraction", false);
  fraction(label_fraction, "label fraction", false);
}

Split::Split(std::map<std::string, PersonRole> roles) : roles_(std::move(roles)) {}

std::vector<std::string> Split::persons(PersonRole r) const {
  std::vector<std::string> out;
  for (const auto& [p, role] : roles_) {
    if (role == r) out.push_back(p);
  }
  return out;
}

std::vector<std::string> Split::training_persons() const {
  std::vector<std::string> out;
  for (const auto& [p, role] : roles_) {
    if (role != PersonRole::Test) out.push_back(p);
  }
  return out;
}

PersonRole Split::role(const std::string& person) const {
  auto it = roles_.find(person);
  if (it == roles_.end()) throw Error(ErrorKind::InvalidArgument, "person '" + person + "' is not in the split");
  return it->second;
}

Split make_split_counts(const std::vector<std::string>& persons, int n_test, int n_source_only, int n_labeled,
                        std::uint64_t seed) {
  std::vector<std::string> order(persons);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  const int total = static_cast<int>(order.size());
  if (n_test < 2 || n_source_only < 0 || n_labeled < 1 || n_test + n_source_only + n_labeled > total) {
    throw Error(ErrorKind::InvalidArgument,
                "cannot split " + std::to_string(total) + " persons into " + std::to_string(n_test) + " test, " +
                    std::to_string(n_source_only) + " source-only and " + std::to_string(n_labeled) + " labeled");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::string, PersonRole> roles;
  for (int i = 0; i < total; ++i) {
    PersonRole r = PersonRole::Unlabeled;
    if (i < n_test) {
      r = PersonRole::Test;
    } else if (i < n_test + n_source_only) {
      r = PersonRole::SourceOnly;
    } else if (i < n_test + n_source_only + n_labeled) {
      r = PersonRole::Labeled;
    }
    roles.emplace(order[static_cast<std::size_t>(i)], r);
  }
  return Split(std::move(roles));
}

Split make_split(const std::vector<std::string>& persons, const SplitSpec& spec) {
  spec.validate();
  std::set<std::string> unique(persons.begin(), persons.end());
  const int total = static_cast<int>(unique.size());
  const int n_test = static_cast<int>(std::lround(spec.test_fraction * total));
  const int train = total - n_test;
  const int n_overlap = std::max(1, static_cast<int>(std::lround(spec.overlap_fraction * train)));
  const int n_labeled = std::max(1, static_cast<int>(std::lround(spec.label_fraction * n_overlap)));
  return make_split_counts(persons, n_test, train - n_overlap, n_labeled, spec.seed);
}

Split relabel(const Split& s, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::InvalidArgument, "label fraction must be in (0, 1]");
  std::vector<std::string> overlap = s.persons(PersonRole::Labeled);
  const auto unlabeled = s.persons(PersonRole::Unlabeled);
  overlap.insert(overlap.end(), unlabeled.begin(), unlabeled.end());
  if (overlap.empty()) throw Error(ErrorKind::InvalidArgument, "split has no overlap persons to label");
  std::sort(overlap.begin(), overlap.end());
  std::mt19937_64 rng(seed);
  std::shuffle(overlap.begin(), overlap.end(), rng);
  const auto n = static_cast<std::size_t>(
      std::max(1L, std::lround(fraction * static_cast<double>(overlap.size()))));
  auto roles = s.roles();
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    roles[overlap[i]] = i < n ? PersonRole::Labeled : PersonRole::Unlabeled;
  }
  return Split(std::move(roles));
}

io::CsvTable split_to_csv(const Split& s) {
  io::CsvTable t;
  t.header = {"person_id", "role"};
  for (const auto& [p, r] : s.roles()) t.rows.push_back({p, to_string(r)});
  return t;
}

Split split_from_csv(const io::CsvTable& t) {
  const auto cp = t.column("person_id"), cr = t.column("role");
  std::map<std::string, PersonRole> roles;
  for (const auto& row : t.rows) {
    if (!roles.emplace(row.at(cp), parse_role(row.at(cr))).second) {
      throw Error(ErrorKind::ParseError, "person '" + row.at(cp) + "' listed twice in split");
    }
  }
  return Split(std::move(roles));
}

CameraPair::CameraPair(std::string x, std::string y) : a(std::move(x)), b(std::move(y)) {
  if (a == b) throw Error(ErrorKind::InvalidArgument, "camera pair needs two distinct cameras");
  if (b < a) std::swap(a, b);
}

PairData camera_pair_data(const FeatureTable& features, const std::vector<std::string>& persons,
                          const std::string& a, const std::string& b, bool balance, std::uint64_t seed) {
  const FeatureTable ta = features.camera(a).with_persons(persons);
  const FeatureTable tb = features.camera(b).with_persons(persons);
  if (ta.empty() || tb.empty()) {
    throw Error(ErrorKind::NoSimilarPairs, "no selected person is seen by both " + a + " and " + b);
  }
  return build_pair_data(ta, tb, balance, seed);
}

std::vector<NamedMetric> train_sources(const FeatureTable& features, const Split& split,
                                       const std::vector<std::string>& cameras, std::uint64_t seed) {
  std::vector<std::string> cams(cameras);
  std::sort(cams.begin(), cams.end());
  const auto persons = split.training_persons();
  std::vector<NamedMetric> out;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    for (std::size_t j = i + 1; j < cams.size(); ++j) {
      CameraPair pair(cams[i], cams[j]);
      const PairData pd = camera_pair_data(features, persons, pair.a, pair.b, true,
                                           derive_seed(seed, "source:" + pair.name()));
      out.push_back({pair, kissme(pd)});
    }
  }
  return out;
}

namespace {

struct PairTask {
  std::string target;
  std::string other;
};

OnboardedPair solve_pair(const FeatureTable& features, const std::vector<std::string>& labeled,
                         const PairTask& task, const std::vector<NamedMetric>& pool, const OnboardConfig& cfg) {
  OnboardedPair out{task.target, task.other, {CameraPair(task.target, task.other), Metric::zero(features.dim())},
                    {}, {}, {Metric::zero(features.dim()), WeightVector::uniform(1), {}, false, 0, 0.0, 0.0, false}, cfg.solver, 0, 0};
  for (const auto& nm : pool) {
    out.pool_names.push_back(nm.pair.name());
    out.pool.push_back(nm.metric);
  }
  PairData pd = [&] {
    try {
      return camera_pair_data(features, labeled, task.target, task.other, cfg.balance,
                              derive_seed(cfg.seed, "target:" + out.learned.pair.name()));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoSimilarPairs) throw;
      throw Error(ErrorKind::NoSimilarPairs,
                  "camera pair " + task.target + "-" + task.other + " has no labeled person in common");
    }
  }();
  if (cfg.lipschitz_steps) {
    const auto [alpha, gamma] = lipschitz_step_sizes(out.pool, cfg.solver.lambda);
    out.solver.alpha = alpha;
    out.solver.gamma = gamma;
  }
  out.n_similar = pd.n_similar();
  out.n_dissimilar = pd.n_dissimilar();
  out.result = solve(out.pool, pd, out.solver);
  out.learned.metric = out.result.metric;
  return out;
}

std::vector<OnboardedPair> run_tasks(const FeatureTable& features, const std::vector<std::string>& labeled,
                                     const std::vector<PairTask>& tasks, const std::vector<NamedMetric>& pool,
                                     const OnboardConfig& cfg) {
  std::vector<OnboardedPair> out;
  if (!cfg.concurrent || tasks.size() < 2) {
    for (const auto& t : tasks) out.push_back(solve_pair(features, labeled, t, pool, cfg));
    return out;
  }
  std::vector<std::future<OnboardedPair>> futures;
  for (const auto& t : tasks) {
    futures.push_back(std::async(std::launch::async, [&, t] { return solve_pair(features, labeled, t, pool, cfg); }));
  }
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

std::vector<OnboardedPair> onboard(const FeatureTable& features, const Split& split,
                                   const std::vector<NamedMetric>& sources, const OnboardConfig& cfg) {
  cfg.solver.validate();
  if (cfg.targets.empty()) throw Error(ErrorKind::InvalidArgument, "no target camera given");
  if (sources.empty()) throw Error(ErrorKind::InvalidArgument, "no source metrics given");
  const auto cameras = features.camera_ids();
  const std::set<std::string> targets(cfg.targets.begin(), cfg.targets.end());
  if (targets.size() != cfg.targets.size()) throw Error(ErrorKind::InvalidArgument, "duplicate target camera");
  for (const auto& t : cfg.targets) {
    if (!std::binary_search(cameras.begin(), cameras.end(), t)) {
      throw Error(ErrorKind::InvalidArgument, "target camera '" + t + "' not in features");
    }
  }
  std::vector<std::string> source_cams;
  for (const auto& c : cameras) {
    if (!targets.count(c)) source_cams.push_back(c);
  }
  if (source_cams.empty()) throw Error(ErrorKind::InvalidArgument, "no source camera left");
  const auto labeled = split.persons(PersonRole::Labeled);

  std::vector<OnboardedPair> out;
  std::vector<NamedMetric> pool(sources);
  for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
    const std::string& t = cfg.targets[i];
    std::vector<PairTask> tasks;
    for (const auto& s : source_cams) tasks.push_back({t, s});
    if (cfg.mode == OnboardMode::Parallel) {
      for (std::size_t j = i + 1; j < cfg.targets.size(); ++j) tasks.push_back({t, cfg.targets[j]});
    } else {
      for (std::size_t j = 0; j < i; ++j) tasks.push_back({t, cfg.targets[j]});
    }
    auto learned = run_tasks(features, labeled, tasks, pool, cfg);
    if (cfg.mode == OnboardMode::Sequential) {
      for (const auto& l : learned) pool.push_back(l.learned);
    }
    for (auto& l : learned) out.push_back(std::move(l));
  }
  return out;
}

EvalReport evaluate_pair(const Metric& m, const FeatureTable& features, const Split& split,
                         const std::string& query_camera, const std::string& gallery_camera, bool multi_query) {
  const auto test = split.persons(PersonRole::Test);
  EvalReport r = cmc(m, features.camera(query_camera).with_persons(test),
                     features.camera(gallery_camera).with_persons(test), multi_query);
  r.camera_pair = {query_camera, gallery_camera};
  return r;
}

double mean_rank1(const std::vector<EvalReport>& reports) {
  if (reports.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : reports) s += r.rank1;
  return s / static_cast<double>(reports.size());
}

MethodReports evaluate_onboarded(const std::vector<OnboardedPair>& pairs, const FeatureTable& features,
                                 const Split& split, bool balance, std::uint64_t seed) {
  MethodReports out;
  const auto labeled = split.persons(PersonRole::Labeled);
  for (const auto& p : pairs) {
    out.ours.push_back(evaluate_pair(p.learned.metric, features, split, p.target, p.other));
    out.avg_source.push_back(evaluate_pair(avg_source(p.pool), features, split, p.target, p.other));
    const PairData pd = camera_pair_data(features, labeled, p.target, p.other, balance,
                                         derive_seed(seed, "target:" + p.learned.pair.name()));
    out.kissme.push_back(evaluate_pair(kissme(pd), features, split, p.target, p.other));
    out.euclidean.push_back(evaluate_pair(euclidean(features.dim()), features, split, p.target, p.other));
  }
  return out;
}

BenchmarkSpec default_benchmark() {
  BenchmarkSpec s;
  s.network.num_cameras = 4;
  s.network.dim = 20;
  s.network.persons_total = 300;
  s.network.noise_scale = 1.0;
  s.split.test_fraction = 0.5;
  s.split.overlap_fraction = 0.5;
  s.split.label_fraction = 0.2;
  s.target = "c4";
  s.solver.lambda = 1e-2;
  s.lipschitz_steps = true;
  return s;
}

namespace {

std::vector<std::string> non_target_cameras(const FeatureTable& f, const std::string& target) {
  std::vector<std::string> out;
  for (const auto& c : f.camera_ids()) {
    if (c != target) out.push_back(c);
  }
  return out;
}

Trial prepare_network(const BenchmarkSpec& spec, std::uint64_t seed) {
  NetworkSpec ns = spec.network;
  ns.seed = derive_seed(seed, "network");
  return Trial{generate(ns), Split(), {}};
}

}  // namespace

Trial prepare_trial(const BenchmarkSpec& spec, std::uint64_t seed) {
  Trial t = prepare_network(spec, seed);
  SplitSpec ss = spec.split;
  ss.seed = derive_seed(seed, "split");
  t.split = make_split(t.network.features.person_ids(), ss);
  t.sources = train_sources(t.network.features, t.split, non_target_cameras(t.network.features, spec.target),
                            derive_seed(seed, "sources"));
  return t;
}

Trial prepare_trial_with_labels(const BenchmarkSpec& spec, std::uint64_t seed, int n_labeled) {
  Trial t = prepare_network(spec, seed);
  const auto persons = t.network.features.person_ids();
  const int total = static_cast<int>(persons.size());
  const int n_test = static_cast<int>(std::lround(spec.split.test_fraction * total));
  t.split = make_split_counts(persons, n_test, total - n_test - n_labeled, n_labeled, derive_seed(seed, "split"));
  t.sources = train_sources(t.network.features, t.split, non_target_cameras(t.network.features, spec.target),
                            derive_seed(seed, "sources"));
  return t;
}

OnboardConfig onboard_config(const BenchmarkSpec& spec, std::uint64_t seed) {
  OnboardConfig c;
  c.targets = {spec.target};
  c.solver = spec.solver;
  c.lipschitz_steps = spec.lipschitz_steps && spec.solver.lambda > 0.0;
  c.seed = derive_seed(seed, "onboard");
  return c;
}

std::vector<SweepRow> sweep_lambda(const BenchmarkSpec& spec, const std::vector<double>& lambdas,
                                   const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "no seeds");
  std::vector<SweepRow> rows(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) rows[i].x = lambdas[i];
  for (auto seed : seeds) {
    const Trial t = prepare_trial(spec, seed);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      BenchmarkSpec s = spec;
      s.solver.lambda = lambdas[i];
      const OnboardConfig cfg = onboard_config(s, seed);
      const auto learned = onboard(t.network.features, t.split, t.sources, cfg);
      const auto rep = evaluate_onboarded(learned, t.network.features, t.split, cfg.balance, cfg.seed);
      rows[i].rank1_ours += mean_rank1(rep.ours);
      rows[i].rank1_avg_source += mean_rank1(rep.avg_source);
      rows[i].rank1_kissme += mean_rank1(rep.kissme);
      rows[i].nauc_ours += average_reports(rep.ours).nauc;
    }
  }
  const double n = static_cast<double>(seeds.size());
  for (auto& r : rows) {
    r.rank1_ours /= n;
    r.rank1_avg_source /= n;
    r.rank1_kissme /= n;
    r.nauc_ours /= n;
  }
  return rows;
}

std::vector<SweepRow> sweep_labels(const BenchmarkSpec& spec, const std::vector<double>& fractions,
                                   const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "no seeds");
  std::vector<SweepRow> rows(fractions.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) rows[i].x = fractions[i];
  for (auto seed : seeds) {
    // Training persons do not depend on the label fraction, so the sources
    // are shared and the labeled sets are nested.
    Trial t = prepare_trial(spec, seed);
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      SplitSpec ss = spec.split;
      ss.label_fraction = fractions[i];
      ss.seed = derive_seed(seed, "split");
      const Split split = make_split(t.network.features.person_ids(), ss);
      const OnboardConfig cfg = onboard_config(spec, seed);
      const auto learned = onboard(t.network.features, split, t.sources, cfg);
      const auto rep = evaluate_onboarded(learned, t.network.features, split, cfg.balance, cfg.seed);
      rows[i].rank1_ours += mean_rank1(rep.ours);
      rows[i].rank1_avg_source += mean_rank1(rep.avg_source);
      rows[i].rank1_kissme += mean_rank1(rep.kissme);
      rows[i].nauc_ours += average_reports(rep.ours).nauc;
    }
  }
  const double n = static_cast<double>(seeds.size());
  for (auto& r : rows) {
    r.rank1_ours /= n;
    r.rank1_avg_source /= n;
    r.rank1_kissme /= n;
    r.nauc_ours /= n;
  }
  return rows;
}

io::CsvTable sweep_to_csv(const std::string& x_name, const std::vector<SweepRow>& rows) {
  io::CsvTable t;
  t.header = {x_name, "rank1", "rank1_avg_source", "rank1_kissme", "nauc"};
  for (const auto& r : rows) {
    t.rows.push_back({io::format_double(r.x), io::format_double(r.rank1_ours), io::format_double(r.rank1_avg_source),
                      io::format_double(r.rank1_kissme), io::format_double(r.nauc_ours)});
  }
  return t;
}

std::vector<SweepRow> sweep_from_csv(const std::string& x_name, const io::CsvTable& t) {
  const auto cx = t.column(x_name), c1 = t.column("rank1"), ca = t.column("rank1_avg_source"),
             ck = t.column("rank1_kissme"), cn = t.column("nauc");
  std::vector<SweepRow> out;
  for (const auto& row : t.rows) {
    out.push_back({io::parse_double(row.at(cx)), io::parse_double(row.at(c1)), io::parse_double(row.at(ca)),
                   io::parse_double(row.at(ck)), io::parse_double(row.at(cn))});
  }
  return out;
}

BenchmarkSpec theorem1_benchmark() {
  BenchmarkSpec s = default_benchmark();
  s.network.persons_total = 450;
  s.split.test_fraction = 1.0 / 3.0;
  return s;
}

Theorem1Trial theorem1_trial(const BenchmarkSpec& spec, std::uint64_t seed, int n_labeled) {
  const Trial t = prepare_trial_with_labels(spec, seed, n_labeled);
  const OnboardConfig cfg = onboard_config(spec, seed);
  const auto learned = onboard(t.network.features, t.split, t.sources, cfg);
  const auto labeled = t.split.persons(PersonRole::Labeled);
  const auto test = t.split.persons(PersonRole::Test);

  Theorem1Trial out;
  for (const auto& p : learned) {
    const std::string name = p.learned.pair.name();
    const PairData train = camera_pair_data(t.network.features, labeled, p.target, p.other, cfg.balance,
                                            derive_seed(cfg.seed, "target:" + name));
    const PairData held_out = camera_pair_data(t.network.features, test, p.target, p.other, true,
                                               derive_seed(cfg.seed, "held-out:" + name));
    const double mu = extract_mu_star(p.result, train, p.solver);
    const double k = lipschitz_k(train, mu);
    const TheoryLoss tl{mu, p.solver.b};
    out.loss_ours += theory_loss(p.learned.metric, held_out, tl);
    out.loss_avg_source += theory_loss(avg_source(p.pool), held_out, tl);
    out.bound += theorem1_bound(k, p.solver.lambda, n_labeled);
    out.mu_star += mu;
    out.k += k;
  }
  const double np = static_cast<double>(learned.size());
  out.loss_ours /= np;
  out.loss_avg_source /= np;
  out.bound /= np;
  out.mu_star /= np;
  out.k /= np;
  const auto rep = evaluate_onboarded(learned, t.network.features, t.split, cfg.balance, cfg.seed);
  out.rank1_ours = mean_rank1(rep.ours);
  out.rank1_avg_source = mean_rank1(rep.avg_source);
  out.row = {seed, n_labeled, out.loss_ours, out.loss_avg_source + out.bound,
             out.loss_ours <= out.loss_avg_source + out.bound};
  return out;
}

BenchmarkSpec negative_transfer_benchmark() {
  BenchmarkSpec s = default_benchmark();
  s.network.num_cameras = 5;
  s.network.outlier_sources = {0};
  s.target = "c5";
  return s;
}

NegativeTransferTrial negative_transfer_trial(const BenchmarkSpec& spec, std::uint64_t seed) {
  Trial t = prepare_network(spec, seed);
  SplitSpec ss = spec.split;
  ss.seed = derive_seed(seed, "split");
  t.split = make_split(t.network.features.person_ids(), ss);

  // Planted source metrics, outliers first, capped at five.
  std::vector<NamedMetric> pool;
  std::vector<bool> is_outlier;
  const std::set<int> outliers(spec.network.outlier_sources.begin(), spec.network.outlier_sources.end());
  for (std::size_t i = 0; i < t.network.camera_pairs.size() && pool.size() < 5; ++i) {
    const auto& [a, b] = t.network.camera_pairs[i];
    if (a == spec.target || b == spec.target) continue;
    pool.push_back({CameraPair(a, b), t.network.ground_truth[i]});
    is_outlier.push_back(outliers.count(static_cast<int>(i)) > 0);
  }
  if (std::none_of(is_outlier.begin(), is_outlier.end(), [](bool o) { return o; }) ||
      std::all_of(is_outlier.begin(), is_outlier.end(), [](bool o) { return o; })) {
    throw Error(ErrorKind::InvalidArgument, "negative-transfer benchmark needs outlier and regular sources");
  }

  const OnboardConfig cfg = onboard_config(spec, seed);
  const auto learned = onboard(t.network.features, t.split, pool, cfg);
  const auto labeled = t.split.persons(PersonRole::Labeled);

  NegativeTransferTrial out;
  out.n_labeled = static_cast<int>(labeled.size());
  for (const auto& p : learned) {
    double outlier = 0.0, other = 0.0;
    int n_out = 0, n_other = 0;
    for (int j = 0; j < p.result.weights.size(); ++j) {
      if (is_outlier[static_cast<std::size_t>(j)]) {
        outlier += p.result.weights[j];
        ++n_out;
      } else {
        other += p.result.weights[j];
        ++n_other;
      }
    }
    out.outlier_weight += outlier / n_out;
    out.mean_other_weight += other / n_other;

    const PairData train = camera_pair_data(t.network.features, labeled, p.target, p.other, cfg.balance,
                                            derive_seed(cfg.seed, "target:" + p.learned.pair.name()));
    const TheoryLoss tl{extract_mu_star(p.result, train, p.solver), p.solver.b};
    const auto uniform = WeightVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.pool.size()),
                                                                1.0 / static_cast<double>(p.pool.size())));
    out.coefficient_learned += theorem2_coefficient(p.pool, p.result.weights, train, tl, p.solver.lambda);
    out.coefficient_uniform += theorem2_coefficient(p.pool, uniform, train, tl, p.solver.lambda);
  }
  const double np = static_cast<double>(learned.size());
  out.outlier_weight /= np;
  out.mean_other_weight /= np;
  out.coefficient_learned /= np;
  out.coefficient_uniform /= np;
  return out;
}

}  // namespace reidhtl
