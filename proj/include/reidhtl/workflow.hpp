#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reidhtl/datagen.hpp"
#include "reidhtl/evaluation.hpp"
#include "reidhtl/io.hpp"
#include "reidhtl/solver.hpp"
#include "reidhtl/theory.hpp"
#include "reidhtl/types.hpp"

namespace reidhtl {

/// Deterministic child seed for a named sub-task.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

// ---- person split ----------------------------------------------------------

/// Test persons are held out for evaluation. Training persons are seen by
/// the source cameras; the overlap subset is also seen by the target
/// cameras, and of those only the labeled ones carry annotations.
enum class PersonRole { Test, SourceOnly, Labeled, Unlabeled };

std::string to_string(PersonRole r);
PersonRole parse_role(const std::string& s);

struct SplitSpec {
  double test_fraction = 0.5;
  double overlap_fraction = 0.5;
  double label_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

class Split {
 public:
  Split() = default;
  explicit Split(std::map<std::string, PersonRole> roles);

  /// Sorted.
  std::vector<std::string> persons(PersonRole r) const;
  std::vector<std::string> training_persons() const;
  PersonRole role(const std::string& person) const;
  const std::map<std::string, PersonRole>& roles() const { return roles_; }

 private:
  std::map<std::string, PersonRole> roles_;
};

Split make_split(const std::vector<std::string>& persons, const SplitSpec& spec);

/// Explicit counts; persons left over after test, source-only and labeled
/// become unlabeled overlap persons.
Split make_split_counts(const std::vector<std::string>& persons, int n_test, int n_source_only, int n_labeled,
                        std::uint64_t seed);

/// Re-draws which overlap persons (labeled ∪ unlabeled) carry labels so
/// that round(fraction·overlap), at least one, are labeled. Nested in the
/// fraction for a fixed seed.
Split relabel(const Split& s, double fraction, std::uint64_t seed);

io::CsvTable split_to_csv(const Split& s);
Split split_from_csv(const io::CsvTable& t);

// ---- camera-pair metrics ---------------------------------------------------

/// Unordered camera pair, stored with a < b.
struct CameraPair {
  std::string a;
  std::string b;

  CameraPair(std::string x, std::string y);
  std::string name() const { return a + "_" + b; }
  bool operator==(const CameraPair&) const = default;
};

struct NamedMetric {
  CameraPair pair;
  Metric metric;
};

/// KISSME metrics for every pair of `cameras`, fitted on all training persons.
std::vector<NamedMetric> train_sources(const FeatureTable& features, const Split& split,
                                       const std::vector<std::string>& cameras, std::uint64_t seed);

/// Pairs between camera `a` and camera `b` restricted to `persons`.
PairData camera_pair_data(const FeatureTable& features, const std::vector<std::string>& persons,
                          const std::string& a, const std::string& b, bool balance, std::uint64_t seed);

// ---- on-boarding -----------------------------------------------------------

enum class OnboardMode { Parallel, Sequential };

struct OnboardConfig {
  std::vector<std::string> targets;
  OnboardMode mode = OnboardMode::Parallel;
  SolverConfig solver;
  /// Replace α, γ with lipschitz_step_sizes(pool, λ) (needs λ > 0).
  bool lipschitz_steps = false;
  bool balance = true;
  std::uint64_t seed = 0;
  /// Run the solves of one target concurrently.
  bool concurrent = true;
};

struct OnboardedPair {
  /// Target camera first.
  std::string target;
  std::string other;
  NamedMetric learned;
  std::vector<std::string> pool_names;
  std::vector<Metric> pool;
  SolveResult result;
  SolverConfig solver;
  int n_similar = 0;
  int n_dissimilar = 0;
};

/// Parallel: every target pairs with the source cameras and with the other
/// targets, and all solves share the source pool. Sequential: targets are
/// added in order, each pairing with the source cameras and the targets
/// before it, and every learned pair joins the pool for the next target.
/// NoSimilarPairs is rethrown with the camera pair in the message.
std::vector<OnboardedPair> onboard(const FeatureTable& features, const Split& split,
                                   const std::vector<NamedMetric>& sources, const OnboardConfig& cfg);

// ---- evaluation ------------------------------------------------------------

/// Test persons; queries from `query_camera`, gallery from `gallery_camera`.
EvalReport evaluate_pair(const Metric& m, const FeatureTable& features, const Split& split,
                         const std::string& query_camera, const std::string& gallery_camera,
                         bool multi_query = true);

struct MethodReports {
  std::vector<EvalReport> ours;
  std::vector<EvalReport> avg_source;
  std::vector<EvalReport> kissme;
  std::vector<EvalReport> euclidean;
};

double mean_rank1(const std::vector<EvalReport>& reports);

/// Evaluates each on-boarded pair with the learned metric and the three
/// baselines; KISSME is fitted on the same labeled target pairs.
MethodReports evaluate_onboarded(const std::vector<OnboardedPair>& pairs, const FeatureTable& features,
                                 const Split& split, bool balance, std::uint64_t seed);

// ---- synthetic benchmarks --------------------------------------------------

struct BenchmarkSpec {
  NetworkSpec network;
  SplitSpec split;
  std::string target = "c4";
  SolverConfig solver;
  bool lipschitz_steps = true;
};

BenchmarkSpec default_benchmark();

/// One seed: generate, split, train sources, on-board the target.
struct Trial {
  SyntheticNetwork network;
  Split split;
  std::vector<NamedMetric> sources;
};

Trial prepare_trial(const BenchmarkSpec& spec, std::uint64_t seed);
/// prepare_trial with an explicit labeled-person count.
Trial prepare_trial_with_labels(const BenchmarkSpec& spec, std::uint64_t seed, int n_labeled);

OnboardConfig onboard_config(const BenchmarkSpec& spec, std::uint64_t seed);

struct SweepRow {
  double x = 0.0;
  double rank1_ours = 0.0;
  double rank1_avg_source = 0.0;
  double rank1_kissme = 0.0;
  double nauc_ours = 0.0;
};

/// Mean over seeds of target-pair rank-1 per λ.
std::vector<SweepRow> sweep_lambda(const BenchmarkSpec& spec, const std::vector<double>& lambdas,
                                   const std::vector<std::uint64_t>& seeds);

/// Mean over seeds per label fraction; baselines fitted on the same pairs.
std::vector<SweepRow> sweep_labels(const BenchmarkSpec& spec, const std::vector<double>& fractions,
                                   const std::vector<std::uint64_t>& seeds);

io::CsvTable sweep_to_csv(const std::string& x_name, const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_from_csv(const std::string& x_name, const io::CsvTable& t);

// ---- theory checks ---------------------------------------------------------

/// Held-out theory loss of M* against Avg-Source + 8k²/(λn) for the target
/// pairs of one seed with n labeled persons. μ* and k come from the
/// training pairs; the held-out pairs are the test persons'.
struct Theorem1Trial {
  BoundCheckRow row;
  double loss_ours = 0.0;
  double loss_avg_source = 0.0;
  double bound = 0.0;
  double mu_star = 0.0;
  double k = 0.0;
  double rank1_ours = 0.0;
  double rank1_avg_source = 0.0;
};

/// default_benchmark with enough training persons for 200 labeled ones and
/// the same 150-person test gallery.
BenchmarkSpec theorem1_benchmark();

Theorem1Trial theorem1_trial(const BenchmarkSpec& spec, std::uint64_t seed, int n_labeled);

/// Five source metrics taken from the planted ground truth of a K = 5
/// network, one of them a rotated outlier; the fifth camera is on-boarded.
struct NegativeTransferTrial {
  double outlier_weight = 0.0;
  double mean_other_weight = 0.0;
  /// Stability coefficient under β* and under uniform β = 1/N, averaged
  /// over the target pairs.
  double coefficient_learned = 0.0;
  double coefficient_uniform = 0.0;
  int n_labeled = 0;
};

BenchmarkSpec negative_transfer_benchmark();
NegativeTransferTrial negative_transfer_trial(const BenchmarkSpec& spec, std::uint64_t seed);

}  // namespace reidhtl
