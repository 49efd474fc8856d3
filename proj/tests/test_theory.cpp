#include <doctest.h>

#include <sstream>

#include "reidhtl/errors.hpp"
#include "reidhtl/projections.hpp"
#include "reidhtl/theory.hpp"
#include "support.hpp"

using namespace reidhtl;
using testsupport::Rng;

TEST_CASE("theory loss examples") {
  Rng rng(60);
  const PairData pd = rng.pairs(3, 4, 6);
  const Eigen::MatrixXd m = rng.psd(3);
  CHECK(theory_loss(m, pd, {0.0, 1.0}) == doctest::Approx(testsupport::frob_inner(m, pd.sigma_similar())));
  CHECK(theory_loss(Metric::zero(3), pd, {2.5, 1.5}) == doctest::Approx(3.75));
}

TEST_CASE("pairwise form equals the scatter form") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = rng.integer(1, 5);
    const PairData pd = rng.pairs(d, rng.integer(1, 10), rng.integer(1, 10));
    const Metric m(rng.symmetric(d));
    const TheoryLoss tl{rng.uniform(0, 3), rng.uniform(0.1, 2)};
    const double a = theory_loss(m, pd, tl);
    CHECK(theory_loss_pairwise(m, pd, tl) == doctest::Approx(a).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("theory loss is affine in the metric") {
  Rng rng(62);
  const PairData pd = rng.pairs(3, 5, 5);
  const TheoryLoss tl{1.3, 1.0};
  const Eigen::MatrixXd a = rng.symmetric(3), b = rng.symmetric(3);
  const double la = theory_loss(a, pd, tl), lb = theory_loss(b, pd, tl), l0 = theory_loss(Metric::zero(3), pd, tl);
  CHECK(theory_loss(Eigen::MatrixXd(2.0 * a - b), pd, tl) == doctest::Approx(2.0 * la - lb));
  CHECK(theory_loss(Eigen::MatrixXd(a + b), pd, tl) == doctest::Approx(la + lb - l0));
}

TEST_CASE("mu_star from a one-dimensional active constraint") {
  // min s²·M s.t. M ≥ 1: M* = 1 with multiplier s².
  for (double s : {0.5, 1.0, 2.0}) {
    const PairData pd(Eigen::MatrixXd::Constant(1, 1, s), Eigen::MatrixXd::Ones(1, 1));
    SolverConfig cfg;
    cfg.lambda = 0.0;
    cfg.alpha = 0.1;
    const auto r = solve({Metric::identity(1)}, pd, cfg);
    CHECK(r.metric(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(extract_mu_star(r, pd, cfg) == doctest::Approx(s * s).epsilon(1e-4));
  }
}

TEST_CASE("mu_star is zero for a slack constraint") {
  // Σ_S = 0 keeps the start point M = 4, far inside C1 for b = 1.
  const PairData pd(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1));
  SolverConfig cfg;
  cfg.lambda = 0.0;
  const auto r = solve({Metric::identity(1)}, pd, cfg, Metric(Eigen::MatrixXd::Constant(1, 1, 4.0)));
  CHECK(r.metric(0, 0) == 4.0);
  CHECK(extract_mu_star(r, pd, cfg) == 0.0);
}

TEST_CASE("lipschitz_k examples") {
  const PairData unit(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Constant(1, 1, 0.5));
  CHECK(lipschitz_k(unit, 0.0) == 2.0);
  CHECK(lipschitz_k(unit, 0.5) == 2.0);
  const PairData wide(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Ones(1, 1));
  CHECK(lipschitz_k(wide, 3.0) == 24.0);
}

TEST_CASE("theory loss is k-Lipschitz") {
  Rng rng(63);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = rng.integer(1, 5);
    const PairData pd = rng.pairs(d, rng.integer(1, 8), rng.integer(1, 8));
    const TheoryLoss tl{rng.uniform(0, 4), 1.0};
    const Eigen::MatrixXd a = rng.psd(d), b = rng.psd(d);
    const double k = lipschitz_k(pd, tl.mu_star);
    CHECK(std::abs(theory_loss(a, pd, tl) - theory_loss(b, pd, tl)) <= k * (a - b).norm() + 1e-12);
  }
}

TEST_CASE("average bound") {
  CHECK(theorem1_bound(1.0, 8.0, 1) == 1.0);
  CHECK(theorem1_bound(3.0, 0.5, 40) == doctest::Approx(2.0 * theorem1_bound(3.0, 0.5, 80)));
  CHECK(theorem1_bound(24.0, 1.0, 1) == 4608.0);
  CHECK_THROWS_AS(theorem1_bound(1.0, 0.0, 10), Error);
  CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 0), Error);
}

TEST_CASE("stability coefficient and gap") {
  Rng rng(64);
  const PairData pd = rng.pairs(2, 3, 3);
  const std::vector<Metric> src{Metric(rng.psd(2)), Metric(rng.psd(2))};
  const TheoryLoss tl{2.0, 1.5};
  const WeightVector zero(Eigen::VectorXd::Zero(2));
  CHECK(theorem2_coefficient(src, zero, pd, tl, 0.5) == doctest::Approx(std::sqrt(3.0 / 0.5)));

  const WeightVector beta(Eigen::Vector2d(0.3, 0.4));
  const Eigen::MatrixXd ms = 0.3 * src[0].matrix() + 0.4 * src[1].matrix();
  const double lt = std::max(0.0, theory_loss(ms, pd, tl));
  const double coef = std::sqrt(lt / 0.7) + ms.norm();
  CHECK(theorem2_coefficient(src, beta, pd, tl, 0.7) == doctest::Approx(coef));
  CHECK(theorem2_gap(Metric::zero(2), beta, src, pd, tl, 0.7, 50, 0.05) ==
        doctest::Approx(coef * std::sqrt(std::log(40.0) / 100.0)));
  CHECK_THROWS_AS(theorem2_gap(Metric::zero(2), beta, src, pd, tl, 0.7, 50, 0.0), Error);
  CHECK_THROWS_AS(theorem2_gap(Metric::zero(2), beta, src, pd, tl, 0.7, 50, 1.0), Error);
  CHECK_THROWS_AS(theorem2_coefficient(src, beta, pd, tl, 0.0), Error);
}

TEST_CASE("bound report round trip") {
  const std::vector<BoundCheckRow> rows{{1, 20, 0.1, 3.0 / 7.0, true}, {2, 200, 1e-300, 5.5, false}};
  std::stringstream ss;
  io::write_csv(ss, bound_rows_to_csv(rows, {"mu_star=0"}));
  const io::CsvTable t = io::read_csv(ss);
  CHECK(t.comments == std::vector<std::string>{"mu_star=0"});
  const auto back = bound_rows_from_csv(t);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].lhs == rows[i].lhs);
    CHECK(back[i].rhs == rows[i].rhs);
    CHECK(back[i].pass == rows[i].pass);
  }
}
