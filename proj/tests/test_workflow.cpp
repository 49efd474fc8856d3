#include <doctest.h>

#include <set>
#include <sstream>

#include "reidhtl/errors.hpp"
#include "reidhtl/projections.hpp"
#include "reidhtl/workflow.hpp"

using namespace reidhtl;

namespace {

std::vector<std::string> people(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(person_name(i, n));
  return out;
}

SyntheticNetwork small_network(int cameras) {
  NetworkSpec s;
  s.num_cameras = cameras;
  s.dim = 5;
  s.persons_total = 60;
  s.seed = 5;
  return generate(s);
}

OnboardConfig fast_config(std::vector<std::string> targets, OnboardMode mode) {
  OnboardConfig c;
  c.targets = std::move(targets);
  c.mode = mode;
  c.solver.lambda = 0.1;
  c.solver.max_outer_iters = 50;
  c.lipschitz_steps = true;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("roles round trip through strings") {
  for (PersonRole r : {PersonRole::Test, PersonRole::SourceOnly, PersonRole::Labeled, PersonRole::Unlabeled}) {
    CHECK(parse_role(to_string(r)) == r);
  }
  CHECK_THROWS_AS(parse_role("teacher"), Error);
}

TEST_CASE("split counts") {
  const Split s = make_split(people(100), {0.5, 0.5, 0.2, 3});
  CHECK(s.persons(PersonRole::Test).size() == 50);
  CHECK(s.persons(PersonRole::SourceOnly).size() == 25);
  CHECK(s.persons(PersonRole::Labeled).size() == 5);
  CHECK(s.persons(PersonRole::Unlabeled).size() == 20);
  CHECK(s.training_persons().size() == 50);
  const Split again = make_split(people(100), {0.5, 0.5, 0.2, 3});
  CHECK(again.roles() == s.roles());
  CHECK(make_split(people(100), {0.5, 0.5, 0.2, 4}).roles() != s.roles());

  const Split c = make_split_counts(people(30), 10, 5, 15, 1);
  CHECK(c.persons(PersonRole::Unlabeled).empty());
  CHECK_THROWS_AS(make_split_counts(people(30), 10, 5, 16, 1), Error);
  CHECK_THROWS_AS(make_split_counts(people(30), 1, 5, 5, 1), Error);
  CHECK_THROWS_AS(make_split(people(10), {1.0, 0.5, 0.2, 0}), Error);
  CHECK_THROWS_AS(make_split(people(10), {0.5, 0.0, 0.2, 0}), Error);
}

TEST_CASE("labeled sets are nested in the label count") {
  const auto ps = people(200);
  std::set<std::string> previous;
  for (int n : {5, 10, 40, 80}) {
    const Split s = make_split_counts(ps, 100, 100 - n, n, 7);
    const auto lab = s.persons(PersonRole::Labeled);
    const std::set<std::string> now(lab.begin(), lab.end());
    for (const auto& p : previous) CHECK(now.count(p) == 1);
    CHECK(s.persons(PersonRole::Test) == make_split_counts(ps, 100, 0, 100, 7).persons(PersonRole::Test));
    previous = now;
  }
}

TEST_CASE("relabel keeps roles outside the overlap and nests labels") {
  const Split s = make_split(people(100), {0.5, 0.5, 0.2, 3});
  const Split half = relabel(s, 0.5, 11), full = relabel(s, 1.0, 11), tenth = relabel(s, 0.1, 11);
  CHECK(half.persons(PersonRole::Test) == s.persons(PersonRole::Test));
  CHECK(half.persons(PersonRole::SourceOnly) == s.persons(PersonRole::SourceOnly));
  CHECK(half.persons(PersonRole::Labeled).size() == 13);
  CHECK(full.persons(PersonRole::Labeled).size() == 25);
  CHECK(full.persons(PersonRole::Unlabeled).empty());
  for (const auto& p : tenth.persons(PersonRole::Labeled)) CHECK(half.role(p) == PersonRole::Labeled);
  CHECK_THROWS_AS(relabel(s, 0.0, 1), Error);
}

TEST_CASE("split CSV round trip") {
  const Split s = make_split(people(40), {0.25, 0.5, 0.5, 1});
  std::stringstream ss;
  io::write_csv(ss, split_to_csv(s));
  CHECK(split_from_csv(io::read_csv(ss)).roles() == s.roles());
  std::stringstream dup("person_id,role\np1,test\np1,labeled\n");
  CHECK_THROWS_AS(split_from_csv(io::read_csv(dup)), Error);
}

TEST_CASE("camera pairs are unordered") {
  CHECK(CameraPair("c3", "c1").name() == "c1_c3");
  CHECK(CameraPair("c3", "c1") == CameraPair("c1", "c3"));
  CHECK_THROWS_AS(CameraPair("c1", "c1"), Error);
}

TEST_CASE("train_sources covers every camera pair") {
  const SyntheticNetwork net = small_network(5);
  const Split s = make_split(net.features.person_ids(), {0.5, 0.5, 0.5, 2});
  const auto src = train_sources(net.features, s, {"c4", "c1", "c2", "c3"}, 1);
  REQUIRE(src.size() == 6);
  CHECK(src.front().pair.name() == "c1_c2");
  CHECK(src.back().pair.name() == "c3_c4");
  for (const auto& nm : src) {
    CHECK(nm.metric.is_psd());
    CHECK(nm.metric.dim() == 5);
  }
}

TEST_CASE("parallel on-boarding") {
  const SyntheticNetwork net = small_network(5);
  const Split s = make_split(net.features.person_ids(), {0.5, 0.5, 0.5, 2});
  const auto src = train_sources(net.features, s, {"c1", "c2", "c3", "c4"}, 1);
  const auto one = onboard(net.features, s, src, fast_config({"c5"}, OnboardMode::Parallel));
  REQUIRE(one.size() == 4);
  for (const auto& p : one) {
    CHECK(p.target == "c5");
    CHECK(p.result.weights.size() == 6);
    CHECK(p.pool_names.front() == "c1_c2");
    CHECK(p.n_similar == p.n_dissimilar);
    CHECK(p.result.weights.in_unit_orthant_ball());
    CHECK(p.learned.metric.is_psd(1e-6));
  }

  const auto src3 = train_sources(net.features, s, {"c1", "c2", "c3"}, 1);
  const auto two = onboard(net.features, s, src3, fast_config({"c4", "c5"}, OnboardMode::Parallel));
  CHECK(two.size() == 7);
  for (const auto& p : two) CHECK(p.result.weights.size() == 3);

  OnboardConfig serial = fast_config({"c5"}, OnboardMode::Parallel);
  serial.concurrent = false;
  const auto again = onboard(net.features, s, src, serial);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(again[i].learned.metric.matrix() == one[i].learned.metric.matrix());
}

TEST_CASE("sequential on-boarding grows the pool") {
  const SyntheticNetwork net = small_network(5);
  const Split s = make_split(net.features.person_ids(), {0.5, 0.5, 0.5, 2});
  const auto src = train_sources(net.features, s, {"c1", "c2", "c3"}, 1);
  const auto out = onboard(net.features, s, src, fast_config({"c4", "c5"}, OnboardMode::Sequential));
  REQUIRE(out.size() == 7);
  for (int i = 0; i < 3; ++i) CHECK(out[static_cast<std::size_t>(i)].result.weights.size() == 3);
  for (int i = 3; i < 7; ++i) {
    CHECK(out[static_cast<std::size_t>(i)].target == "c5");
    CHECK(out[static_cast<std::size_t>(i)].result.weights.size() == 6);
  }
  CHECK(out.back().other == "c4");
  CHECK(out.back().pool_names.back() == "c3_c4");
}

TEST_CASE("on-boarding without shared labeled persons") {
  const SyntheticNetwork net = small_network(4);
  const Split s = make_split(net.features.person_ids(), {0.5, 0.5, 0.5, 2});
  const auto labeled = s.persons(PersonRole::Labeled);
  const std::set<std::string> lab(labeled.begin(), labeled.end());
  std::vector<FeatureRow> rows;
  for (const auto& r : net.features.rows()) {
    if (!(r.camera_id == "c4" && lab.count(r.person_id))) rows.push_back(r);
  }
  const FeatureTable cut(net.features.dim(), rows);
  const auto src = train_sources(cut, s, {"c1", "c2", "c3"}, 1);
  try {
    onboard(cut, s, src, fast_config({"c4"}, OnboardMode::Parallel));
    FAIL("expected NoSimilarPairs");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoSimilarPairs);
    CHECK(std::string(e.what()).find("c4") != std::string::npos);
  }
  CHECK_THROWS_AS(onboard(cut, s, src, fast_config({"c9"}, OnboardMode::Parallel)), Error);
  CHECK_THROWS_AS(onboard(cut, s, src, fast_config({"c4", "c4"}, OnboardMode::Parallel)), Error);
}

TEST_CASE("evaluation of on-boarded pairs") {
  const SyntheticNetwork net = small_network(4);
  const Split s = make_split(net.features.person_ids(), {0.5, 0.5, 0.5, 2});
  const auto src = train_sources(net.features, s, {"c1", "c2", "c3"}, 1);
  const auto out = onboard(net.features, s, src, fast_config({"c4"}, OnboardMode::Parallel));
  const MethodReports rep = evaluate_onboarded(out, net.features, s, true, 9);
  CHECK(rep.ours.size() == 3);
  CHECK(rep.kissme.size() == 3);
  CHECK(rep.ours.front().num_gallery == 30);
  CHECK(rep.ours.front().camera_pair == std::pair<std::string, std::string>("c4", "c1"));
  const double m = mean_rank1(rep.ours);
  CHECK(m >= 0.0);
  CHECK(m <= 1.0);
}

TEST_CASE("sweep CSV round trip") {
  const std::vector<SweepRow> rows{{1e-6, 0.1, 0.2, 0.3, 0.4}, {0.1, 1.0 / 3.0, 0.5, 0.25, 2.0 / 3.0}};
  std::stringstream ss;
  io::write_csv(ss, sweep_to_csv("lambda", rows));
  const auto t = io::read_csv(ss);
  CHECK(t.header.front() == "lambda");
  const auto back = sweep_from_csv("lambda", t);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].x == rows[i].x);
    CHECK(back[i].rank1_ours == rows[i].rank1_ours);
    CHECK(back[i].rank1_avg_source == rows[i].rank1_avg_source);
    CHECK(back[i].rank1_kissme == rows[i].rank1_kissme);
    CHECK(back[i].nauc_ours == rows[i].nauc_ours);
  }
}
