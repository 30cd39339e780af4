#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbsdelta/model.hpp"
#include "fbsdelta/registry.hpp"
#include "support/random_instances.hpp"

using namespace fbsdelta;

namespace {

LQCoefficients<double> affine_example_coeffs() {
  auto scal = [](double v) { return MatX<double>::Constant(1, 1, v).eval(); };
  LQStageData<double> st;
  st.A = scal(1.0);
  st.B = scal(0.0);
  st.Q = scal(0.0);
  st.L = scal(0.0);
  st.C1 = scal(1.0);
  st.C2 = scal(0.0);
  st.C3 = scal(0.0);
  st.C4 = scal(1.0);
  st.D = scal(1.0);
  st.R = scal(1.0);
  st.S = scal(1.0);
  VecX<double> eta = VecX<double>::Zero(1);
  return LQCoefficients<double>::uniform(3, st, scal(1.0), scal(1.0), scal(0.0), eta);
}

VecX<double> vec1(double v) { return VecX<double>::Constant(1, v); }

}  // namespace

TEST_CASE("tagged coefficient evaluation") {
  auto lq = as_model(affine_example_coeffs());
  // drift with A=1, Q=0, C1=1 at x=2, u=3
  CHECK(evaluate(lq, Coefficient::Drift, 0, 0, vec1(2), vec1(0), vec1(0), vec1(3))[0] ==
        doctest::Approx(5.0));
  // running cost with D=R=S=C4=1 at all-ones arguments
  CHECK(evaluate(lq, Coefficient::RunningCost, 0, 0, vec1(1), vec1(1), vec1(1), vec1(1))[0] ==
        doctest::Approx(2.0));

  auto zero = make_model<double>("zero", 3);
  CHECK(evaluate(zero, Coefficient::Drift, 1, 0, vec1(4), vec1(1), vec1(2), vec1(3))[0] == 0.0);

  auto tanh = make_model<double>("tanh_drift", 3);
  CHECK(evaluate(tanh, Coefficient::Drift, 0, 0, vec1(0), vec1(0), vec1(0), vec1(0))[0] == 0.0);

  const VecX<double> wrong_dim = VecX<double>::Zero(2);
  CHECK_THROWS_AS(evaluate(lq, Coefficient::Drift, 0, 0, wrong_dim, vec1(0), vec1(0), vec1(0)),
                  ShapeMismatch);
}

TEST_CASE("derivative check against central differences") {
  auto lq = as_model(affine_example_coeffs());
  auto rep = check_derivatives(lq, 20, 7);
  CHECK(rep.max_rel_error <= 1e-7);

  // planted bias in the drift state derivative is flagged
  auto broken = lq;
  auto good_dx = lq.drift_x;
  broken.drift_x = [good_dx](int k, Index node, const VecX<double>& x, const VecX<double>& y,
                             const VecX<double>& z, const VecX<double>& u) {
    MatX<double> d = good_dx(k, node, x, y, z, u);
    d(0, 0) += 0.1;
    return d;
  };
  auto bad_rep = check_derivatives(broken, 20, 7);
  const auto flagged = bad_rep.flagged(1e-2);
  REQUIRE(flagged.size() == 1);
  CHECK(flagged[0] == "drift/x");
  for (const auto& blk : bad_rep.blocks)
    if (blk.block == "drift/x") CHECK(blk.max_rel_error >= 1e-2);

  // constant coefficients: central differences are exact
  auto zero = make_model<double>("zero", 4);
  CHECK(check_derivatives(zero, 10, 3).max_rel_error <= 1e-9);
}

TEST_CASE("every registry model has consistent derivatives") {
  for (const auto& name : registered_model_names()) {
    auto model = make_model<double>(name, 4);
    auto rep = check_derivatives(model, 100, 42);
    INFO(name, " max rel error ", rep.max_rel_error);
    CHECK(rep.max_rel_error <= 1e-6);
  }
}

TEST_CASE("coefficients are deterministic per (node, arguments)") {
  // node-dependent drift: reads the node index
  auto model = make_model<double>("tanh_drift", 3);
  auto base = model.drift;
  model.drift = [base](int k, Index node, const VecX<double>& x, const VecX<double>& y,
                       const VecX<double>& z, const VecX<double>& u) {
    VecX<double> v = base(k, node, x, y, z, u);
    v[0] += 0.25 * static_cast<double>(node);
    return v;
  };
  RngStream rng(5, "determinism");
  for (int t = 0; t < 20; ++t) {
    const auto x = rng.uniform_vector<double>(1, -3, 3);
    const auto y = rng.uniform_vector<double>(1, -3, 3);
    const auto z = rng.uniform_vector<double>(1, -3, 3);
    const auto u = rng.uniform_vector<double>(1, -3, 3);
    const Index node = rng.uniform_index(4);
    const VecX<double> a = model.drift(1, node, x, y, z, u);
    const VecX<double> b = model.drift(1, node, x, y, z, u);
    CHECK(a[0] == b[0]);  // bit-identical
  }
}

TEST_CASE("domination checker") {
  MonotonicityConstants<double> storage_c = storage_constants<double>();
  CHECK_NOTHROW(storage_c.validate());

  SUBCASE("constant initial map gives nonnegative slack") {
    auto model = make_model<double>("decoupled", 4);
    MonotonicityConstants<double> c;
    c.mu = 1.0;
    c.v = 0.0;
    c.M = MatX<double>::Identity(1, 1);
    c.A = {MatX<double>::Zero(1, 1)};
    c.B = {MatX<double>::Identity(1, 1)};
    c.C = {MatX<double>::Identity(1, 1)};
    auto rep = check_domination(model, c, 2000, 11);
    CHECK(!rep.inequalities[0].skipped);
    CHECK(rep.inequalities[0].min_slack >= 0.0);
    CHECK(rep.inequalities[3].min_slack >= 0.0);  // drift/diffusion free of (y', z')
    CHECK(rep.inequalities[1].skipped);           // v = 0
    CHECK(rep.inequalities[2].skipped);
    CHECK(rep.inequalities[1].notice.find("DivisionByZeroConstant") != std::string::npos);
  }

  SUBCASE("storage preset passes with its published constants") {
    auto model = make_model<double>("storage", 4);
    auto rep = check_domination(model, storage_c, 10000, 21);
    CHECK(rep.min_slack() >= -1e-12);
  }

  SUBCASE("planted Lipschitz violation is caught with a witness") {
    auto model = make_model<double>("zero", 3);
    model.driver = [](int, Index, const VecX<double>& x, const VecX<double>&,
                      const VecX<double>&, const VecX<double>&) { return VecX<double>(2.0 * x); };
    MonotonicityConstants<double> c;
    c.mu = 0.0;
    c.v = 1.0;
    c.selected_case = MonotonicityConstants<double>::Case::Two;
    c.M = MatX<double>::Identity(1, 1);
    c.G = MatX<double>::Identity(1, 1);
    c.A = {MatX<double>::Identity(1, 1)};
    c.B = {MatX<double>::Identity(1, 1)};
    c.C = {MatX<double>::Identity(1, 1)};
    auto rep = check_domination(model, c, 500, 31);
    const auto& driver_ineq = rep.inequalities[2];
    CHECK(!driver_ineq.skipped);
    CHECK(driver_ineq.min_slack < 0.0);
    // witness reproduces the slack: |A xhat| / v - |2 xhat| = -|xhat|
    const double xhat = (driver_ineq.witness.x - driver_ineq.witness.xbar)[0];
    CHECK(driver_ineq.min_slack == doctest::Approx(-std::abs(xhat)));
  }

  SUBCASE("invalid constants are rejected") {
    MonotonicityConstants<double> c;
    c.mu = 1.0;
    c.v = 1.0;
    c.M = c.G = MatX<double>::Identity(1, 1);
    c.A = c.B = c.C = {MatX<double>::Identity(1, 1)};
    auto model = make_model<double>("zero", 2);
    CHECK_THROWS_AS(check_domination(model, c, 10, 1), InvariantViolation);
  }
}

TEST_CASE("monotonicity checker") {
  SUBCASE("coinciding pairs give exactly zero slack") {
    // degenerate sample box forces theta = theta_bar in every draw
    auto model = make_model<double>("tanh_drift", 3);
    MonotonicityConstants<double> c;
    c.mu = 1.0;
    c.v = 0.0;
    c.M = MatX<double>::Identity(1, 1);
    c.G = MatX<double>::Identity(1, 1);
    c.A = {MatX<double>::Zero(1, 1)};
    c.B = {MatX<double>::Identity(1, 1)};
    c.C = {MatX<double>::Identity(1, 1)};
    CheckerOptions opts;
    opts.box_lo = opts.box_hi = 1.75;
    auto rep = check_monotonicity(model, c, 50, 3, opts);
    for (const auto& q : rep.case_one) CHECK(q.min_slack == 0.0);
    for (const auto& q : rep.case_two) CHECK(q.min_slack == 0.0);
  }

  SUBCASE("hand-evaluated one-dimensional instance") {
    // drift = -y, diffusion = -z, driver = x, initial map constant,
    // terminal map identity; slacks evaluate symbolically to
    //   case one: 0, x^2 - x^2 = 0, y^2 + z^2 - x^2
    auto model = make_model<double>("zero", 3);
    model.drift = [](int, Index, const VecX<double>&, const VecX<double>& y,
                     const VecX<double>&, const VecX<double>&) { return VecX<double>(-y); };
    model.diffusion = [](int, Index, const VecX<double>&, const VecX<double>&,
                         const VecX<double>& z, const VecX<double>&) { return VecX<double>(-z); };
    model.driver = [](int, Index, const VecX<double>& x, const VecX<double>&,
                      const VecX<double>&, const VecX<double>&) { return x; };
    model.terminal_map = [](Index, const VecX<double>& x) { return x; };

    MonotonicityConstants<double> c;
    c.mu = 0.0;
    c.v = 1.0;
    c.selected_case = MonotonicityConstants<double>::Case::One;
    c.M = MatX<double>::Identity(1, 1);
    c.G = MatX<double>::Identity(1, 1);
    c.A = {MatX<double>::Zero(1, 1)};
    c.B = {MatX<double>::Identity(1, 1)};
    c.C = {MatX<double>::Identity(1, 1)};
    auto rep = check_monotonicity(model, c, 1000, 17);
    CHECK(rep.selected_case == MonotonicityConstants<double>::Case::One);
    CHECK(rep.case_one[0].min_slack == 0.0);  // constant initial map, mu = 0
    CHECK(rep.case_one[1].min_slack == 0.0);  // identity terminal map against G = I
    CHECK(rep.case_one[2].min_slack < 0.0);
    const auto& w = rep.case_one[2].witness;
    const double xh = (w.x - w.xbar)[0], yh = (w.y - w.ybar)[0], zh = (w.z - w.zbar)[0];
    CHECK(rep.case_one[2].min_slack == doctest::Approx(yh * yh + zh * zh - xh * xh));
    // both cases are recorded
    CHECK(rep.case_two[2].min_slack < 0.0);
  }

  SUBCASE("storage preset passes its gating sweep") {
    auto model = make_model<double>("storage", 4);
    auto rep = check_monotonicity(model, storage_constants<double>(), 10000, 29);
    CHECK(rep.min_slack() >= -1e-12);
  }
}

TEST_CASE("control sets") {
  auto space = ControlSet<double>::all_of_space(2);
  CHECK(space.contains(VecX<double>::Constant(2, 1e9)));
  CHECK(space.vertices().empty());

  VecX<double> lo(2), hi(2);
  lo << 0.0, -1.0;
  hi << 1.0, 2.0;
  auto box = ControlSet<double>::box(lo, hi);
  VecX<double> inside(2), outside(2);
  inside << 0.5, 0.0;
  outside << 1.5, 0.0;
  CHECK(box.contains(inside));
  CHECK(!box.contains(outside));
  CHECK(box.project(outside)[0] == doctest::Approx(1.0));
  CHECK(box.vertices().size() == 4);
  RngStream rng(9, "ctrl");
  for (int t = 0; t < 50; ++t) CHECK(box.contains(box.sample(rng)));

  VecX<double> bad_hi(2);
  bad_hi << -0.5, 0.0;
  CHECK_THROWS_AS(ControlSet<double>::box(lo, bad_hi), InvariantViolation);
}
