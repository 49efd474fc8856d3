#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reidhtl/datagen.hpp"
#include "reidhtl/errors.hpp"
#include "reidhtl/evaluation.hpp"
#include "reidhtl/io.hpp"
#include "reidhtl/theory.hpp"
#include "reidhtl/workflow.hpp"

namespace fs = std::filesystem;
using namespace reidhtl;

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 3;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoSimilarPairs:
    case ErrorKind::DegenerateScatter:
    case ErrorKind::SingularScatter:
    case ErrorKind::RankDeficient:
    case ErrorKind::EmptyGallery:
    case ErrorKind::QueryIdentityMissing:
    case ErrorKind::NonFiniteObjective:
    case ErrorKind::NegativeQuadraticForm:
      return kDataError;
    default:
      return kUsageError;
  }
}

std::string metric_file_name(const CameraPair& p) { return "pair_" + p.name() + ".metric"; }

/// pair_<a>_<b>.metric files in `dir`; camera ids are resolved against `cameras`
/// so that ids containing '_' still split unambiguously.
std::vector<NamedMetric> load_metric_dir(const fs::path& dir, const std::vector<std::string>& cameras) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "metric directory '" + dir.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("pair_", 0) == 0 && e.path().extension() == ".metric") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  const std::set<std::string> known(cameras.begin(), cameras.end());
  std::vector<NamedMetric> out;
  for (const auto& f : files) {
    const std::string stem = f.stem().string().substr(5);
    bool found = false;
    for (std::size_t cut = stem.find('_'); cut != std::string::npos; cut = stem.find('_', cut + 1)) {
      const std::string a = stem.substr(0, cut), b = stem.substr(cut + 1);
      if (known.count(a) && known.count(b) && a != b) {
        out.push_back({CameraPair(a, b), io::load_metric(f)});
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::InvalidArgument, "cannot match " + f.filename().string() + " to a camera pair");
  }
  if (out.empty()) throw Error(ErrorKind::IoError, "no pair_*.metric files in '" + dir.string() + "'");
  return out;
}

void add_network_flags(CLI::App* app, NetworkSpec& ns) {
  app->add_option("--cameras", ns.num_cameras, "Number of cameras K")->check(CLI::Range(2, 1000))->capture_default_str();
  app->add_option("--dim", ns.dim, "Feature dimension d")->check(CLI::Range(1, 100000))->capture_default_str();
  app->add_option("--persons", ns.persons_total, "Number of persons P")->check(CLI::Range(2, 10000000))->capture_default_str();
  app->add_option("--noise", ns.noise_scale, "Nuisance noise scale")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--shots", ns.shots_per_camera, "Images per person per camera")->check(CLI::Range(1, 1000))->capture_default_str();
  app->add_option("--outliers", ns.outlier_sources, "Camera-pair indices with a rotated planted metric");
  app->add_option("--shared-nuisance", ns.shared_nuisance, "Variance of the nuisance shared by all cameras")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--camera-nuisance", ns.camera_nuisance, "Variance of each camera's own nuisance")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--distortion", ns.distortion, "Strength of the per-camera linear distortion")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
}

void add_split_flags(CLI::App* app, SplitSpec& ss) {
  app->add_option("--test-fraction", ss.test_fraction, "Fraction of persons held out for testing")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--overlap", ss.overlap_fraction, "Fraction of training persons also seen by the targets")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--label-fraction", ss.label_fraction, "Fraction of overlap persons with labels")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

struct SolverFlags {
  std::string beta_projection = "paper_eq6";
  std::string inner_projection = "plain_alternation";
  bool no_backtracking = false;
};

void add_solver_flags(CLI::App* app, SolverConfig& sc, SolverFlags& sf) {
  app->add_option("--lambda", sc.lambda, "Regularization weight λ")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--b", sc.b, "Dissimilarity margin b")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--alpha", sc.alpha, "M step size")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--gamma", sc.gamma, "β step size")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--max-outer", sc.max_outer_iters, "Outer iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--max-inner", sc.max_inner_iters, "Inner projection iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--outer-tol", sc.outer_tol, "Relative objective change tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--inner-tol", sc.inner_tol, "C1/C2 feasibility tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--beta-projection", sf.beta_projection, "paper_eq6 or exact_euclidean")
      ->check(CLI::IsMember({"paper_eq6", "exact_euclidean"}))->capture_default_str();
  app->add_option("--inner-projection", sf.inner_projection, "plain_alternation or dykstra")
      ->check(CLI::IsMember({"plain_alternation", "dykstra"}))->capture_default_str();
  app->add_flag("--no-backtracking", sf.no_backtracking, "Keep step sizes fixed");
}

void apply_solver_flags(SolverConfig& sc, const SolverFlags& sf) {
  sc.beta_projection = sf.beta_projection == "paper_eq6" ? BetaProjection::PaperEq6 : BetaProjection::ExactEuclidean;
  sc.inner_projection =
      sf.inner_projection == "dykstra" ? InnerProjection::Dykstra : InnerProjection::PlainAlternation;
  sc.backtracking = !sf.no_backtracking;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

void print_rank_table(const std::vector<EvalReport>& reports) {
  std::printf("%-16s %8s %8s %8s %8s %8s\n", "pair", "rank1", "rank5", "rank10", "rank20", "nAUC");
  for (const auto& r : reports) {
    const std::string name = r.camera_pair.first + "-" + r.camera_pair.second;
    std::printf("%-16s %8.4f %8.4f %8.4f %8.4f %8.4f\n", name.c_str(), r.rank(1), r.rank(5), r.rank(10),
                r.rank(20), r.nauc);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source metric transfer for on-boarding re-identification cameras"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic camera network");
  NetworkSpec gen_spec;
  fs::path gen_out = "data";
  add_network_flags(gen, gen_spec);
  gen->add_option("--overlap", gen_spec.target_overlap_fraction, "Recorded overlap fraction")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  gen->add_option("--label-fraction", gen_spec.label_fraction, "Recorded label fraction")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // train-sources
  auto* train = app.add_subcommand("train-sources", "Fit KISSME metrics for every source camera pair");
  fs::path train_features, train_out = "run", train_split;
  std::vector<std::string> train_targets;
  SplitSpec train_split_spec;
  train->add_option("--features", train_features, "Feature CSV")->required();
  train->add_option("--target", train_targets, "Camera(s) excluded from the sources")->required();
  train->add_option("--split", train_split, "Existing split CSV (otherwise one is drawn)");
  add_split_flags(train, train_split_spec);
  train->add_option("--out", train_out, "Run directory")->capture_default_str();

  // onboard
  auto* onb = app.add_subcommand("onboard", "Learn metrics for target camera pairs");
  fs::path onb_features, onb_split, onb_sources, onb_out = "run";
  std::string onb_mode = "parallel";
  std::optional<double> onb_label_fraction;
  OnboardConfig onb_cfg;
  SolverFlags onb_sf;
  bool onb_lipschitz = false, onb_no_balance = false;
  onb->add_option("--features", onb_features, "Feature CSV")->required();
  onb->add_option("--split", onb_split, "Split CSV (default <out>/split.csv)");
  onb->add_option("--source-metrics", onb_sources, "Directory of source metrics (default <out>/sources)");
  onb->add_option("--target", onb_cfg.targets, "Target camera(s), in on-boarding order")->required();
  onb->add_option("--mode", onb_mode, "parallel or sequential")
      ->check(CLI::IsMember({"parallel", "sequential"}))->capture_default_str();
  onb->add_option("--label-fraction", onb_label_fraction, "Re-draw labels for this fraction of overlap persons")
      ->check(CLI::Range(0.0, 1.0));
  add_solver_flags(onb, onb_cfg.solver, onb_sf);
  onb->add_flag("--lipschitz-steps", onb_lipschitz, "Use α = 1/(2λ), γ = 1/(2λ‖G‖) instead of --alpha/--gamma");
  onb->add_flag("--no-balance", onb_no_balance, "Keep every dissimilar pair");
  onb->add_option("--out", onb_out, "Run directory")->capture_default_str();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "CMC / nAUC of metric files on the test persons");
  fs::path ev_features, ev_split, ev_metrics, ev_out = "run/eval";
  std::vector<std::string> ev_query;
  bool ev_single = false;
  ev->add_option("--features", ev_features, "Feature CSV")->required();
  ev->add_option("--split", ev_split, "Split CSV (all persons are test persons if omitted)");
  ev->add_option("--metrics", ev_metrics, "Directory of pair_*.metric files")->required();
  ev->add_option("--query-camera", ev_query, "Camera(s) used as query side when in a pair");
  ev->add_flag("--single-shot", ev_single, "Every query image is a probe");
  ev->add_option("--out", ev_out, "Report directory")->capture_default_str();

  // sweeps and theory checks share the synthetic benchmark flags
  BenchmarkSpec bench = default_benchmark();
  SolverFlags bench_sf;
  int n_seeds = 5;
  fs::path bench_out;
  BenchmarkSpec th_bench = theorem1_benchmark();
  auto add_bench = [&](CLI::App* sub, BenchmarkSpec& spec) {
    add_network_flags(sub, spec.network);
    add_split_flags(sub, spec.split);
    add_solver_flags(sub, spec.solver, bench_sf);
    sub->add_option("--target", spec.target, "Target camera")->capture_default_str();
    sub->add_option("--seeds", n_seeds, "Number of seeds, starting at --seed")->check(CLI::Range(1, 100000))->capture_default_str();
  };

  auto* swl = app.add_subcommand("sweep-lambda", "Rank-1 against λ on the synthetic benchmark");
  std::vector<double> lambdas{1e-6, 1e-4, 1e-2, 1.0, 1e2};
  add_bench(swl, bench);
  swl->add_option("--lambdas", lambdas, "λ values")->check(CLI::NonNegativeNumber);
  swl->add_option("--out", bench_out, "Output CSV")->required();

  auto* swf = app.add_subcommand("sweep-labels", "Rank-1 against label fraction on the synthetic benchmark");
  std::vector<double> fractions{0.1, 0.3, 0.5, 1.0};
  add_bench(swf, bench);
  swf->add_option("--fractions", fractions, "Label fractions")->check(CLI::Range(0.0, 1.0));
  swf->add_option("--out", bench_out, "Output CSV")->required();

  auto* th = app.add_subcommand("theory-check", "Empirical checks of the generalization bounds");
  std::vector<int> ns{20, 50, 100, 200};
  add_bench(th, th_bench);
  th->add_option("--n", ns, "Labeled-person counts")->check(CLI::PositiveNumber);
  th->add_option("--out", bench_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*gen) {
      gen_spec.seed = seed;
      const SyntheticNetwork net = generate(gen_spec);
      io::save_features(gen_out / "features.csv", net.features);
      for (std::size_t i = 0; i < net.camera_pairs.size(); ++i) {
        const CameraPair p(net.camera_pairs[i].first, net.camera_pairs[i].second);
        io::save_metric(gen_out / "ground_truth" / metric_file_name(p), net.ground_truth[i]);
      }
      std::printf("wrote %zu rows and %zu planted metrics to %s\n", net.features.size(), net.ground_truth.size(),
                  gen_out.string().c_str());
    } else if (*train) {
      const FeatureTable features = io::load_features(train_features);
      Split split;
      if (!train_split.empty()) {
        split = split_from_csv(io::load_csv(train_split));
      } else {
        train_split_spec.seed = derive_seed(seed, "split");
        split = make_split(features.person_ids(), train_split_spec);
      }
      const std::set<std::string> targets(train_targets.begin(), train_targets.end());
      const auto all_cams = features.camera_ids();
      std::vector<std::string> cams;
      for (const auto& c : all_cams) {
        if (!targets.count(c)) cams.push_back(c);
      }
      for (const auto& t : targets) {
        if (!std::binary_search(all_cams.begin(), all_cams.end(), t)) {
          throw Error(ErrorKind::InvalidArgument, "--target camera '" + t + "' not in features");
        }
      }
      if (cams.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two source cameras");
      const auto sources = train_sources(features, split, cams, derive_seed(seed, "sources"));
      io::save_csv(train_out / "split.csv", split_to_csv(split));
      for (const auto& s : sources) io::save_metric(train_out / "sources" / metric_file_name(s.pair), s.metric);
      std::printf("wrote %zu source metrics to %s\n", sources.size(), (train_out / "sources").string().c_str());
    } else if (*onb) {
      const FeatureTable features = io::load_features(onb_features);
      Split split = split_from_csv(io::load_csv(onb_split.empty() ? onb_out / "split.csv" : onb_split));
      if (onb_label_fraction) split = relabel(split, *onb_label_fraction, derive_seed(seed, "labels"));
      const auto sources = load_metric_dir(onb_sources.empty() ? onb_out / "sources" : onb_sources,
                                           features.camera_ids());
      apply_solver_flags(onb_cfg.solver, onb_sf);
      onb_cfg.mode = onb_mode == "sequential" ? OnboardMode::Sequential : OnboardMode::Parallel;
      onb_cfg.lipschitz_steps = onb_lipschitz;
      onb_cfg.balance = !onb_no_balance;
      onb_cfg.seed = derive_seed(seed, "onboard");
      const auto learned = onboard(features, split, sources, onb_cfg);
      for (const auto& p : learned) {
        const std::string name = p.learned.pair.name();
        io::save_metric(onb_out / "learned" / metric_file_name(p.learned.pair), p.learned.metric);
        io::save_weights(onb_out / ("beta_" + name + ".csv"), p.pool_names, p.result.weights);
        io::save_trace(onb_out / ("objective_trace_" + name + ".csv"), p.result.objective_trace);
        std::printf("%s: %d sources, %d iterations%s, objective %s\n", name.c_str(), p.result.weights.size(),
                    p.result.iterations, p.result.converged ? "" : " (not converged)",
                    io::format_double(p.result.objective_trace.back().second).c_str());
        if (p.result.inner_cap_hit) std::fprintf(stderr, "warning: %s: inner projection hit its cap\n", name.c_str());
      }
      if (onb_split.empty() || onb_label_fraction) io::save_csv(onb_out / "split_used.csv", split_to_csv(split));
    } else if (*ev) {
      const FeatureTable features = io::load_features(ev_features);
      Split split;
      if (ev_split.empty()) {
        std::map<std::string, PersonRole> roles;
        for (const auto& p : features.person_ids()) roles.emplace(p, PersonRole::Test);
        split = Split(std::move(roles));
      } else {
        split = split_from_csv(io::load_csv(ev_split));
      }
      const auto metrics = load_metric_dir(ev_metrics, features.camera_ids());
      const std::set<std::string> query(ev_query.begin(), ev_query.end());
      std::vector<EvalReport> reports;
      for (const auto& nm : metrics) {
        const bool swap = query.count(nm.pair.b) && !query.count(nm.pair.a);
        const std::string q = swap ? nm.pair.b : nm.pair.a, g = swap ? nm.pair.a : nm.pair.b;
        reports.push_back(evaluate_pair(nm.metric, features, split, q, g, !ev_single));
        io::save_csv(ev_out / ("eval_" + nm.pair.name() + ".csv"), report_to_csv(reports.back()));
      }
      EvalReport avg = average_reports(reports);
      avg.camera_pair = {"average", "all"};
      io::save_csv(ev_out / "eval_average.csv", report_to_csv(avg));
      reports.push_back(avg);
      print_rank_table(reports);
    } else if (*swl || *swf) {
      apply_solver_flags(bench.solver, bench_sf);
      const auto seeds = seed_range(seed, n_seeds);
      const auto rows = *swl ? sweep_lambda(bench, lambdas, seeds) : sweep_labels(bench, fractions, seeds);
      const std::string x = *swl ? "lambda" : "label_fraction";
      io::save_csv(bench_out, sweep_to_csv(x, rows));
      std::printf("%-14s %8s %10s %8s\n", x.c_str(), "rank1", "avg_src", "kissme");
      for (const auto& r : rows) {
        std::printf("%-14g %8.4f %10.4f %8.4f\n", r.x, r.rank1_ours, r.rank1_avg_source, r.rank1_kissme);
      }
    } else if (*th) {
      apply_solver_flags(th_bench.solver, bench_sf);
      const auto seeds = seed_range(seed, n_seeds);
      std::vector<BoundCheckRow> rows1;
      std::vector<std::string> notes1{"lhs = held-out theory loss of the learned metric",
                                      "rhs = held-out theory loss of Avg-Source + 8k^2/(lambda n)",
                                      "mu* is an estimate (psi/alpha of the last accepted projection)"};
      for (int n : ns) {
        for (auto s : seeds) {
          const auto t = theorem1_trial(th_bench, s, n);
          rows1.push_back(t.row);
          notes1.push_back("seed=" + std::to_string(s) + " n=" + std::to_string(n) +
                           " mu*=" + io::format_double(t.mu_star) + " k=" + io::format_double(t.k) +
                           " rank1=" + io::format_double(t.rank1_ours) +
                           " rank1_avg_source=" + io::format_double(t.rank1_avg_source));
        }
      }
      io::save_csv(bench_out / "theorem1.csv", bound_rows_to_csv(rows1, notes1));

      BenchmarkSpec nt = negative_transfer_benchmark();
      nt.solver = th_bench.solver;
      nt.network.dim = th_bench.network.dim;
      std::vector<BoundCheckRow> rows2;
      std::vector<std::string> notes2{"lhs = coefficient under learned beta, rhs = under uniform beta = 1/N",
                                      "the O(1/n) term is not included"};
      for (auto s : seeds) {
        const auto t = negative_transfer_trial(nt, s);
        rows2.push_back({s, t.n_labeled, t.coefficient_learned, t.coefficient_uniform,
                         t.coefficient_learned <= t.coefficient_uniform});
        notes2.push_back("seed=" + std::to_string(s) + " outlier_weight=" + io::format_double(t.outlier_weight) +
                         " mean_other_weight=" + io::format_double(t.mean_other_weight));
      }
      io::save_csv(bench_out / "theorem2.csv", bound_rows_to_csv(rows2, notes2));
      int p1 = 0, p2 = 0;
      for (const auto& r : rows1) p1 += r.pass;
      for (const auto& r : rows2) p2 += r.pass;
      std::printf("average bound: %d/%zu rows within bound\nstability: %d/%zu seeds with a smaller coefficient under learned weights\n", p1,
                  rows1.size(), p2, rows2.size());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
  return 0;
}
