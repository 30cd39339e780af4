#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbsdelta/scenario_tree.hpp"
#include "support/enumeration.hpp"
#include "support/random_instances.hpp"

using namespace fbsdelta;

TEST_CASE("branch spec invariants") {
  CHECK_NOTHROW(BranchSpec<double>::rademacher().validate());
  CHECK_NOTHROW(BranchSpec<double>::three_point().validate());

  // asymmetric two-point support: mean 0.2*2 - 0.8*0.5 = 0, second moment
  // 0.2*4 + 0.8*0.25 = 1 (verified by direct arithmetic)
  BranchSpec<double> asym{{{2.0, 0.2}, {-0.5, 0.8}}};
  CHECK(0.2 * 2.0 + 0.8 * (-0.5) == doctest::Approx(0.0));
  CHECK(0.2 * 4.0 + 0.8 * 0.25 == doctest::Approx(1.0));
  CHECK_NOTHROW(asym.validate());

  BranchSpec<double> bad_prob{{{1.0, 0.5}, {-1.0, 0.4}}};
  CHECK_THROWS_AS(bad_prob.validate(), BadProbability);

  BranchSpec<double> negative{{{1.0, 1.5}, {-1.0, -0.5}}};
  CHECK_THROWS_AS(negative.validate(), BadProbability);

  BranchSpec<double> biased{{{1.5, 0.5}, {-0.5, 0.5}}};
  CHECK_THROWS_AS(biased.validate(), MomentViolation);

  // variance off: values +-2 equiprobable
  BranchSpec<double> wide{{{2.0, 0.5}, {-2.0, 0.5}}};
  CHECK_THROWS_AS(wide.validate(), MomentViolation);
}

TEST_CASE("tree construction") {
  auto t1 = rademacher_tree<double>(1);
  CHECK(t1.num_nodes(0) == 1);
  CHECK(t1.num_nodes(1) == 2);
  CHECK(t1.path_probability(1, 0) == doctest::Approx(0.5));
  CHECK(t1.path_probability(1, 1) == doctest::Approx(0.5));

  auto t3 = rademacher_tree<double>(3);
  CHECK(t3.total_nodes() == 15);  // 1 + 2 + 4 + 8
  for (int level = 0; level <= 3; ++level) {
    double sum = 0;
    for (Index i = 0; i < t3.num_nodes(level); ++i) sum += t3.path_probability(level, i);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }

  CHECK(t3.history(0, 0) == "");
  CHECK(t3.history(2, 2) == "10");
  CHECK(t3.node_at("10") == std::pair<int, Index>{2, 2});
  CHECK(t3.child(1, 1, 0) == 2);
  CHECK(t3.parent(2, 2) == 1);
  CHECK(t3.branch_index(2, 2) == 0);

  // offending level is reported
  std::vector<BranchSpec<double>> steps{BranchSpec<double>::rademacher(),
                                        BranchSpec<double>{{{1.5, 0.5}, {-0.5, 0.5}}}};
  try {
    ScenarioTree<double> bad(2, steps);
    CHECK(false);
  } catch (const MomentViolation& e) {
    CHECK(e.level() == 1);
  }
}

TEST_CASE("conditional expectation on the spec examples") {
  auto tree = rademacher_tree<double>(2);
  AdaptedProcess<double> proc = AdaptedProcess<double>::zeros(tree, 1, 2);
  proc.at(2) << 4.0, 2.0, 1.0, -1.0;  // histories ++, +-, -+, --

  const MatX<double> yp = cond_expect_next(tree, proc, 1);
  CHECK(yp(0, 0) == doctest::Approx(3.0));
  CHECK(yp(0, 1) == doctest::Approx(0.0));

  const MatX<double> zp = cond_expect_weighted(tree, proc, 1);
  CHECK(zp(0, 0) == doctest::Approx(1.0));  // (4 - 2) / 2

  // total expectation of the level-1 slice (3, 0) with probs (1/2, 1/2)
  AdaptedProcess<double> lvl1 = AdaptedProcess<double>::zeros(tree, 1, 1);
  lvl1.at(1) << 3.0, 0.0;
  CHECK(total_expectation(tree, lvl1, 1)[0] == doctest::Approx(1.5));

  // constants: tower property on constants and martingale-difference mean
  AdaptedProcess<double> c = AdaptedProcess<double>::constant(tree, 2, VecX<double>::Constant(1, 7.25));
  CHECK(cond_expect_next(tree, c, 0)(0, 0) == doctest::Approx(7.25));
  CHECK(cond_expect_weighted(tree, c, 0)(0, 0) == doctest::Approx(0.0));

  // process equal to the branch label has conditional mean 0 and weighted mean 1
  AdaptedProcess<double> lbl = AdaptedProcess<double>::zeros(tree, 1, 2);
  for (Index i = 0; i < 4; ++i) lbl.at(2)(0, i) = tree.branch(1).value(tree.branch_index(2, i));
  CHECK(cond_expect_next(tree, lbl, 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(cond_expect_weighted(tree, lbl, 1)(0, 0) == doctest::Approx(1.0));
  CHECK(cond_expect_weighted(tree, lbl, 1)(0, 1) == doctest::Approx(1.0));

  // zero process and deterministic root
  AdaptedProcess<double> zero = AdaptedProcess<double>::zeros(tree, 1, 2);
  CHECK(total_expectation(tree, zero, 2)[0] == 0.0);
  AdaptedProcess<double> root = AdaptedProcess<double>::zeros(tree, 3, 0);
  root.at(0) << 1.0, -2.0, 0.5;
  CHECK(total_expectation(tree, root, 0)[1] == doctest::Approx(-2.0));

  CHECK_THROWS_AS(cond_expect_next(tree, lvl1, 1), LevelMismatch);
}

TEST_CASE("rademacher closed form is exact") {
  auto tree = rademacher_tree<double>(1);
  AdaptedProcess<double> p = AdaptedProcess<double>::zeros(tree, 1, 1);
  p.at(1) << 4.0, 2.0;
  CHECK(cond_expect_next(tree, p, 0)(0, 0) == (4.0 + 2.0) / 2.0);
  CHECK(cond_expect_weighted(tree, p, 0)(0, 0) == (4.0 - 2.0) / 2.0);

  // dyadic values stay bit-exact under the weighted sum
  p.at(1) << 0.375, -1.25;
  CHECK(cond_expect_next(tree, p, 0)(0, 0) == (0.375 - 1.25) / 2.0);
  CHECK(cond_expect_weighted(tree, p, 0)(0, 0) == (0.375 + 1.25) / 2.0);
}

TEST_CASE("tower property on random trees") {
  for (int trial = 0; trial < 20; ++trial) {
    RngStream rng(991, "tower", static_cast<std::uint64_t>(trial));
    auto tree = testing::random_tree(rng, 512);
    const int N = tree.horizon();
    auto proc = testing::random_process(rng, tree, 2, N, 3.0);
    for (int k = 0; k < N; ++k) {
      const MatX<double> inner = cond_expect_next(tree, proc, k);
      const VecX<double> via_inner = total_expectation(tree, inner, k);
      const VecX<double> direct = total_expectation(tree, proc, k + 1);
      CHECK((via_inner - direct).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("full-path enumeration oracle agrees") {
  for (int trial = 0; trial < 50; ++trial) {
    RngStream rng(1234, "enum_oracle", static_cast<std::uint64_t>(trial));
    auto tree = testing::random_tree(rng, 1024);
    const int N = tree.horizon();
    auto proc = testing::random_process(rng, tree, 2, N, 5.0);
    for (int k = 0; k < N; ++k) {
      const MatX<double> got_next = cond_expect_next(tree, proc, k);
      const MatX<double> want_next = testing::enum_cond_next(tree, proc.at(k + 1), k);
      CHECK((got_next - want_next).cwiseAbs().maxCoeff() < 1e-12);
      const MatX<double> got_w = cond_expect_weighted(tree, proc, k);
      const MatX<double> want_w = testing::enum_cond_weighted(tree, proc.at(k + 1), k);
      CHECK((got_w - want_w).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("processes are value types with uniform dimension") {
  auto tree = rademacher_tree<double>(2);
  auto p = AdaptedProcess<double>::zeros(tree, 2, 2);
  CHECK(p.dim() == 2);
  CHECK(p.has_level(2));
  CHECK(!p.has_level(3));
  auto q = p;
  q.at(1)(0, 0) = 5.0;
  CHECK(p.at(1)(0, 0) == 0.0);
  CHECK(sup_distance(p, q) == doctest::Approx(5.0));
  CHECK(sup_norm(q) == doctest::Approx(5.0));
}
