#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fbsdelta/rng.hpp"
#include "fbsdelta/scenario_tree.hpp"

namespace fbsdelta {

// Admissible control set for one time step: either all of R^m or a box.
template <typename Scalar>
struct ControlSet {
  enum class Kind { AllOfSpace, Box };

  Kind kind = Kind::AllOfSpace;
  Index dim = 0;
  VecX<Scalar> lower, upper;  // box bounds, unused for AllOfSpace

  static ControlSet all_of_space(Index m) { return ControlSet{Kind::AllOfSpace, m, {}, {}}; }

  static ControlSet box(VecX<Scalar> lo, VecX<Scalar> hi) {
    if (lo.size() != hi.size()) throw ShapeMismatch("box bounds differ in size");
    if (((hi - lo).array() < Scalar(0)).any())
      throw InvariantViolation("box lower bound exceeds upper bound");
    const Index m = lo.size();
    return ControlSet{Kind::Box, m, std::move(lo), std::move(hi)};
  }

  bool contains(const VecX<Scalar>& u, Scalar tol = Scalar(1e-12)) const {
    if (u.size() != dim) return false;
    if (kind == Kind::AllOfSpace) return true;
    return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
  }

  VecX<Scalar> project(const VecX<Scalar>& u) const {
    if (kind == Kind::AllOfSpace) return u;
    return u.cwiseMax(lower).cwiseMin(upper);
  }

  VecX<Scalar> sample(RngStream& rng, Scalar radius = Scalar(3)) const {
    if (kind == Kind::AllOfSpace) return radius * rng.template normal_vector<Scalar>(dim);
    VecX<Scalar> u(dim);
    for (Index i = 0; i < dim; ++i)
      u[i] = static_cast<Scalar>(
          rng.uniform(static_cast<double>(lower[i]), static_cast<double>(upper[i])));
    return u;
  }

  // all corners of a box (empty for AllOfSpace)
  std::vector<VecX<Scalar>> vertices() const {
    std::vector<VecX<Scalar>> out;
    if (kind != Kind::Box || dim > 12) return out;
    const Index count = Index(1) << dim;
    out.reserve(static_cast<std::size_t>(count));
    for (Index mask = 0; mask < count; ++mask) {
      VecX<Scalar> v(dim);
      for (Index i = 0; i < dim; ++i) v[i] = (mask >> i) & 1 ? upper[i] : lower[i];
      out.push_back(std::move(v));
    }
    return out;
  }
};

// Per-step control set with broadcasting: a single entry applies to every k.
template <typename Scalar>
const ControlSet<Scalar>& control_set_at(const std::vector<ControlSet<Scalar>>& sets, int k) {
  if (sets.empty()) throw ShapeMismatch("no control sets configured");
  if (sets.size() == 1) return sets.front();
  return sets[static_cast<std::size_t>(k)];
}

// Declared structure of the boundary maps, used by the sufficiency audit.
enum class BoundaryKind { Constant, Linear, General };

// The coefficient bundle of the controlled system
//   x_{k+1} = drift(k) + diffusion(k) w_k,   y_k = -driver(k+1),
//   x_0 = initial_map(y_0),                  y_N = terminal_map(x_N),
// with running cost `running_cost`, terminal cost `terminal_cost(x_N)` and
// initial cost `initial_cost(y_0)`. The y and z arguments of every stage
// evaluator are the one-step predictors y'_{k+1} = E[y_{k+1}|F_{k-1}] and
// z'_{k+1} = E[y_{k+1} w_k|F_{k-1}]. Stage evaluators receive the level-k node
// index so coefficients may be node-dependent (F_{k-1}-measurable); the
// terminal quantities receive the level-N node. First derivatives are supplied
// analytically by each registry entry.
template <typename Scalar>
struct ModelSpec {
  using VecFn = std::function<VecX<Scalar>(int k, Index node, const VecX<Scalar>& x,
                                           const VecX<Scalar>& y, const VecX<Scalar>& z,
                                           const VecX<Scalar>& u)>;
  using MatFn = std::function<MatX<Scalar>(int k, Index node, const VecX<Scalar>& x,
                                           const VecX<Scalar>& y, const VecX<Scalar>& z,
                                           const VecX<Scalar>& u)>;
  using ScalarFn = std::function<Scalar(int k, Index node, const VecX<Scalar>& x,
                                        const VecX<Scalar>& y, const VecX<Scalar>& z,
                                        const VecX<Scalar>& u)>;

  std::string name;
  Index n = 0;  // state dimension
  Index m = 0;  // control dimension
  int horizon = 0;

  VecFn drift, diffusion, driver;  // -> R^n
  ScalarFn running_cost;           // -> R

  // stage derivatives: *_x, *_y, *_z are n x n, *_u is n x m; cost gradients
  // are vectors
  MatFn drift_x, drift_y, drift_z, drift_u;
  MatFn diffusion_x, diffusion_y, diffusion_z, diffusion_u;
  MatFn driver_x, driver_y, driver_z, driver_u;
  VecFn running_cost_x, running_cost_y, running_cost_z;
  VecFn running_cost_u;  // -> R^m

  std::function<VecX<Scalar>(const VecX<Scalar>& y)> initial_map;     // -> R^n
  std::function<MatX<Scalar>(const VecX<Scalar>& y)> initial_map_dy;  // n x n
  std::function<VecX<Scalar>(Index node, const VecX<Scalar>& x)> terminal_map;
  std::function<MatX<Scalar>(Index node, const VecX<Scalar>& x)> terminal_map_dx;
  std::function<Scalar(Index node, const VecX<Scalar>& x)> terminal_cost;
  std::function<VecX<Scalar>(Index node, const VecX<Scalar>& x)> terminal_cost_dx;
  std::function<Scalar(const VecX<Scalar>& y)> initial_cost;
  std::function<VecX<Scalar>(const VecX<Scalar>& y)> initial_cost_dy;

  std::vector<ControlSet<Scalar>> controls;  // per step (size 1 broadcasts)

  BoundaryKind initial_map_kind = BoundaryKind::General;   // structure of initial_map
  BoundaryKind terminal_map_kind = BoundaryKind::General;  // structure of terminal_map
};

enum class Coefficient { Drift, Diffusion, Driver, RunningCost };

inline const char* coefficient_name(Coefficient c) {
  switch (c) {
    case Coefficient::Drift: return "drift";
    case Coefficient::Diffusion: return "diffusion";
    case Coefficient::Driver: return "driver";
    case Coefficient::RunningCost: return "running_cost";
  }
  return "?";
}

// Tagged coefficient evaluation with shape checking; the running cost is
// returned as a 1-vector.
template <typename Scalar>
VecX<Scalar> evaluate(const ModelSpec<Scalar>& model, Coefficient which, int k, Index node,
                      const VecX<Scalar>& x, const VecX<Scalar>& y, const VecX<Scalar>& z,
                      const VecX<Scalar>& u) {
  if (x.size() != model.n || y.size() != model.n || z.size() != model.n)
    throw ShapeMismatch("state argument dimension differs from model.n");
  if (u.size() != model.m) throw ShapeMismatch("control argument dimension differs from model.m");
  switch (which) {
    case Coefficient::Drift: return model.drift(k, node, x, y, z, u);
    case Coefficient::Diffusion: return model.diffusion(k, node, x, y, z, u);
    case Coefficient::Driver: return model.driver(k, node, x, y, z, u);
    case Coefficient::RunningCost: {
      VecX<Scalar> out(1);
      out[0] = model.running_cost(k, node, x, y, z, u);
      return out;
    }
  }
  throw ShapeMismatch("unknown coefficient tag");
}

// ---------------------------------------------------------------------------
// Assumption checkers. These are sampling-based falsifiers: they can exhibit a
// counterexample with a witness, or build confidence over a sweep; they never
// prove the universally quantified conditions.
// ---------------------------------------------------------------------------

struct CheckerOptions {
  double box_lo = -10.0;
  double box_hi = 10.0;
  double fd_step = 1e-5;  // central-difference step for derivative checks
};

template <typename Scalar>
struct DerivativeBlockReport {
  std::string block;  // e.g. "drift/x"
  Scalar max_rel_error = 0;
};

template <typename Scalar>
struct DerivativeReport {
  std::vector<DerivativeBlockReport<Scalar>> blocks;
  Scalar max_rel_error = 0;

  std::vector<std::string> flagged(Scalar threshold = Scalar(1e-6)) const {
    std::vector<std::string> out;
    for (const auto& b : blocks)
      if (b.max_rel_error > threshold) out.push_back(b.block);
    return out;
  }
};

namespace detail {

template <typename Scalar>
Scalar rel_entry_error(const MatX<Scalar>& fd, const MatX<Scalar>& an) {
  using std::abs;
  Scalar worst = 0;
  for (Index j = 0; j < fd.cols(); ++j)
    for (Index i = 0; i < fd.rows(); ++i)
      worst = std::max(worst, abs(fd(i, j) - an(i, j)) / std::max(Scalar(1), abs(an(i, j))));
  return worst;
}

// central finite-difference Jacobian of fn w.r.t. `arg` (one of the four
// stage arguments selected by mutating the copy passed in)
template <typename Scalar, typename Fn>
MatX<Scalar> fd_jacobian(Fn&& fn, const VecX<Scalar>& at, Index out_dim, Scalar h) {
  MatX<Scalar> jac(out_dim, at.size());
  VecX<Scalar> probe = at;
  for (Index j = 0; j < at.size(); ++j) {
    probe[j] = at[j] + h;
    VecX<Scalar> up = fn(probe);
    probe[j] = at[j] - h;
    VecX<Scalar> dn = fn(probe);
    probe[j] = at[j];
    jac.col(j) = (up - dn) / (Scalar(2) * h);
  }
  return jac;
}

}  // namespace detail

// Compares every supplied derivative block against central finite differences
// at random points. Report-only.
template <typename Scalar>
DerivativeReport<Scalar> check_derivatives(const ModelSpec<Scalar>& model, int trial_points,
                                           std::uint64_t seed, const CheckerOptions& opts = {},
                                           const ScenarioTree<Scalar>* tree = nullptr) {
  const Scalar h = static_cast<Scalar>(opts.fd_step);
  DerivativeReport<Scalar> report;
  auto record = [&](const std::string& block, Scalar err) {
    for (auto& b : report.blocks)
      if (b.block == block) {
        b.max_rel_error = std::max(b.max_rel_error, err);
        report.max_rel_error = std::max(report.max_rel_error, err);
        return;
      }
    report.blocks.push_back({block, err});
    report.max_rel_error = std::max(report.max_rel_error, err);
  };

  for (int t = 0; t < trial_points; ++t) {
    RngStream rng(seed, "check_derivatives", static_cast<std::uint64_t>(t));
    const int k = static_cast<int>(rng.uniform_index(std::max(1, model.horizon)));
    const Index node = tree ? rng.uniform_index(tree->num_nodes(k)) : 0;
    const Index nodeN = tree ? rng.uniform_index(tree->num_nodes(tree->horizon())) : 0;
    const VecX<Scalar> x = rng.template uniform_vector<Scalar>(model.n, opts.box_lo, opts.box_hi);
    const VecX<Scalar> y = rng.template uniform_vector<Scalar>(model.n, opts.box_lo, opts.box_hi);
    const VecX<Scalar> z = rng.template uniform_vector<Scalar>(model.n, opts.box_lo, opts.box_hi);
    const VecX<Scalar> u = rng.template uniform_vector<Scalar>(model.m, opts.box_lo, opts.box_hi);

    struct StageBlock {
      const char* coeff;
      const char* arg;
      std::function<VecX<Scalar>(const VecX<Scalar>&)> eval;
      MatX<Scalar> analytic;
    };
    std::vector<StageBlock> blocks;
    auto add_vec_blocks = [&](const char* cname, const typename ModelSpec<Scalar>::VecFn& fn,
                              const typename ModelSpec<Scalar>::MatFn& dx,
                              const typename ModelSpec<Scalar>::MatFn& dy,
                              const typename ModelSpec<Scalar>::MatFn& dz,
                              const typename ModelSpec<Scalar>::MatFn& du) {
      blocks.push_back({cname, "x", [&, k, node](const VecX<Scalar>& p) { return fn(k, node, p, y, z, u); },
                        dx(k, node, x, y, z, u)});
      blocks.push_back({cname, "y", [&, k, node](const VecX<Scalar>& p) { return fn(k, node, x, p, z, u); },
                        dy(k, node, x, y, z, u)});
      blocks.push_back({cname, "z", [&, k, node](const VecX<Scalar>& p) { return fn(k, node, x, y, p, u); },
                        dz(k, node, x, y, z, u)});
      blocks.push_back({cname, "u", [&, k, node](const VecX<Scalar>& p) { return fn(k, node, x, y, z, p); },
                        du(k, node, x, y, z, u)});
    };
    add_vec_blocks("drift", model.drift, model.drift_x, model.drift_y, model.drift_z,
                   model.drift_u);
    add_vec_blocks("diffusion", model.diffusion, model.diffusion_x, model.diffusion_y,
                   model.diffusion_z, model.diffusion_u);
    add_vec_blocks("driver", model.driver, model.driver_x, model.driver_y, model.driver_z,
                   model.driver_u);

    auto scalar_wrap = [&](auto&& fn) {
      return [fn](const VecX<Scalar>& p) {
        VecX<Scalar> out(1);
        out[0] = fn(p);
        return out;
      };
    };
    blocks.push_back({"running_cost", "x",
                      scalar_wrap([&, k, node](const VecX<Scalar>& p) {
                        return model.running_cost(k, node, p, y, z, u);
                      }),
                      model.running_cost_x(k, node, x, y, z, u).transpose()});
    blocks.push_back({"running_cost", "y",
                      scalar_wrap([&, k, node](const VecX<Scalar>& p) {
                        return model.running_cost(k, node, x, p, z, u);
                      }),
                      model.running_cost_y(k, node, x, y, z, u).transpose()});
    blocks.push_back({"running_cost", "z",
                      scalar_wrap([&, k, node](const VecX<Scalar>& p) {
                        return model.running_cost(k, node, x, y, p, u);
                      }),
                      model.running_cost_z(k, node, x, y, z, u).transpose()});
    blocks.push_back({"running_cost", "u",
                      scalar_wrap([&, k, node](const VecX<Scalar>& p) {
                        return model.running_cost(k, node, x, y, z, p);
                      }),
                      model.running_cost_u(k, node, x, y, z, u).transpose()});

    blocks.push_back({"initial_map", "y",
                      [&](const VecX<Scalar>& p) { return model.initial_map(p); },
                      model.initial_map_dy(y)});
    blocks.push_back({"terminal_map", "x",
                      [&, nodeN](const VecX<Scalar>& p) { return model.terminal_map(nodeN, p); },
                      model.terminal_map_dx(nodeN, x)});
    blocks.push_back({"terminal_cost", "x",
                      scalar_wrap([&, nodeN](const VecX<Scalar>& p) {
                        return model.terminal_cost(nodeN, p);
                      }),
                      model.terminal_cost_dx(nodeN, x).transpose()});
    blocks.push_back({"initial_cost", "y",
                      scalar_wrap([&](const VecX<Scalar>& p) { return model.initial_cost(p); }),
                      model.initial_cost_dy(y).transpose()});

    for (auto& blk : blocks) {
      const VecX<Scalar>& point = blk.arg == std::string("u")   ? u
                                  : blk.arg == std::string("x") ? x
                                  : blk.arg == std::string("y") ? y
                                                                : z;
      MatX<Scalar> fd = detail::fd_jacobian<Scalar>(blk.eval, point, blk.analytic.rows(), h);
      record(std::string(blk.coeff) + "/" + blk.arg, detail::rel_entry_error(fd, blk.analytic));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Domination / monotonicity constants and checkers
// ---------------------------------------------------------------------------

template <typename Scalar>
struct MonotonicityConstants {
  enum class Case { One, Two };

  Scalar mu = 0;
  Scalar v = 0;
  MatX<Scalar> M;  // scales the initial-map domination, rows x n
  MatX<Scalar> G;  // scales the terminal-map domination, rows x n
  std::vector<MatX<Scalar>> A, B, C;  // per step (size 1 broadcasts), rows x n
  Case selected_case = Case::One;

  void validate() const {
    const bool case_a = mu > Scalar(0) && v == Scalar(0);
    const bool case_b = mu == Scalar(0) && v > Scalar(0);
    if (!(case_a || case_b))
      throw InvariantViolation("exactly one of (mu>0, v=0) or (mu=0, v>0) must hold");
    if (A.empty() || B.empty() || C.empty())
      throw ShapeMismatch("A, B, C step matrices must be provided");
  }

  const MatX<Scalar>& A_at(int k) const { return A.size() == 1 ? A[0] : A[std::size_t(k)]; }
  const MatX<Scalar>& B_at(int k) const { return B.size() == 1 ? B[0] : B[std::size_t(k)]; }
  const MatX<Scalar>& C_at(int k) const { return C.size() == 1 ? C[0] : C[std::size_t(k)]; }
};

template <typename Scalar>
struct MarginWitness {
  int k = -1;
  Index node = 0;
  VecX<Scalar> x, xbar, y, ybar, z, zbar, u;
};

template <typename Scalar>
struct InequalityMargin {
  std::string name;
  bool skipped = false;      // vacuous because the dividing constant is zero
  std::string notice;        // set when skipped
  Scalar min_slack = std::numeric_limits<Scalar>::infinity();
  MarginWitness<Scalar> witness;

  void update(Scalar slack, const MarginWitness<Scalar>& w) {
    if (slack < min_slack) {
      min_slack = slack;
      witness = w;
    }
  }
};

template <typename Scalar>
struct DominationReport {
  std::array<InequalityMargin<Scalar>, 4> inequalities;  // initial_map, terminal_map, driver, drift_diffusion
  Scalar min_slack() const {
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const auto& q : inequalities)
      if (!q.skipped) m = std::min(m, q.min_slack);
    return m;
  }
};

// Sweeps random argument pairs and evaluates the four domination inequalities
// (initial map, terminal map, driver in x, drift/diffusion in (y, z)). An
// inequality whose dividing constant is zero is vacuous in the selected case
// and is skipped with a DivisionByZeroConstant notice.
template <typename Scalar>
DominationReport<Scalar> check_domination(const ModelSpec<Scalar>& model,
                                          const MonotonicityConstants<Scalar>& constants,
                                          int samples, std::uint64_t seed,
                                          const CheckerOptions& opts = {},
                                          const ScenarioTree<Scalar>* tree = nullptr) {
  constants.validate();
  DominationReport<Scalar> rep;
  rep.inequalities[0].name = "initial_map";
  rep.inequalities[1].name = "terminal_map";
  rep.inequalities[2].name = "driver";
  rep.inequalities[3].name = "drift_diffusion";
  if (constants.mu == Scalar(0)) {
    for (std::size_t i : {std::size_t(0), std::size_t(3)}) {
      rep.inequalities[i].skipped = true;
      rep.inequalities[i].notice = "DivisionByZeroConstant: mu = 0, inequality vacuous";
    }
  }
  if (constants.v == Scalar(0)) {
    for (std::size_t i : {std::size_t(1), std::size_t(2)}) {
      rep.inequalities[i].skipped = true;
      rep.inequalities[i].notice = "DivisionByZeroConstant: v = 0, inequality vacuous";
    }
  }

  for (int t = 0; t < samples; ++t) {
    RngStream rng(seed, "check_domination", static_cast<std::uint64_t>(t));
    MarginWitness<Scalar> w;
    w.k = static_cast<int>(rng.uniform_index(std::max(1, model.horizon)));
    w.node = tree ? rng.uniform_index(tree->num_nodes(w.k)) : 0;
    const Index nodeN = tree ? rng.uniform_index(tree->num_nodes(tree->horizon())) : 0;
    auto draw = [&] { return rng.template uniform_vector<Scalar>(model.n, opts.box_lo, opts.box_hi); };
    w.x = draw();
    w.xbar = draw();
    w.y = draw();
    w.ybar = draw();
    w.z = draw();
    w.zbar = draw();
    w.u = rng.template uniform_vector<Scalar>(model.m, opts.box_lo, opts.box_hi);

    const VecX<Scalar> yhat = w.y - w.ybar;
    const VecX<Scalar> xhat = w.x - w.xbar;
    const VecX<Scalar> zhat = w.z - w.zbar;

    if (!rep.inequalities[0].skipped) {
      const Scalar lhs = (model.initial_map(w.y) - model.initial_map(w.ybar)).norm();
      const Scalar rhs = (constants.M * yhat).norm() / constants.mu;
      rep.inequalities[0].update(rhs - lhs, w);
    }
    if (!rep.inequalities[1].skipped) {
      const Scalar lhs = (model.terminal_map(nodeN, w.x) - model.terminal_map(nodeN, w.xbar)).norm();
      const Scalar rhs = (constants.G * xhat).norm() / constants.v;
      rep.inequalities[1].update(rhs - lhs, w);
    }
    if (!rep.inequalities[2].skipped) {
      const Scalar lhs =
          (model.driver(w.k, w.node, w.x, w.y, w.z, w.u) -
           model.driver(w.k, w.node, w.xbar, w.y, w.z, w.u))
              .norm();
      const Scalar rhs = (constants.A_at(w.k) * xhat).norm() / constants.v;
      rep.inequalities[2].update(rhs - lhs, w);
    }
    if (!rep.inequalities[3].skipped) {
      const Scalar rhs =
          (constants.B_at(w.k) * yhat + constants.C_at(w.k) * zhat).norm() / constants.mu;
      const Scalar lhs_b = (model.drift(w.k, w.node, w.x, w.y, w.z, w.u) -
                            model.drift(w.k, w.node, w.x, w.ybar, w.zbar, w.u))
                               .norm();
      const Scalar lhs_s = (model.diffusion(w.k, w.node, w.x, w.y, w.z, w.u) -
                            model.diffusion(w.k, w.node, w.x, w.ybar, w.zbar, w.u))
                               .norm();
      rep.inequalities[3].update(rhs - std::max(lhs_b, lhs_s), w);
    }
  }
  return rep;
}

template <typename Scalar>
struct MonotonicityReport {
  typename MonotonicityConstants<Scalar>::Case selected_case;
  // both cases are evaluated and recorded; the selected one is the contract
  std::array<InequalityMargin<Scalar>, 3> case_one;  // initial_map, terminal_map, coefficients
  std::array<InequalityMargin<Scalar>, 3> case_two;

  const std::array<InequalityMargin<Scalar>, 3>& selected() const {
    return selected_case == MonotonicityConstants<Scalar>::Case::One ? case_one : case_two;
  }
  Scalar min_slack() const {
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const auto& q : selected()) m = std::min(m, q.min_slack);
    return m;
  }
};

// Sweeps random pairs (theta, theta_bar) and evaluates the monotonicity
// inequalities of both cases, where <Gamma, theta> := <driver, x> + <drift, y>
// + <diffusion, z>.
template <typename Scalar>
MonotonicityReport<Scalar> check_monotonicity(const ModelSpec<Scalar>& model,
                                              const MonotonicityConstants<Scalar>& constants,
                                              int samples, std::uint64_t seed,
                                              const CheckerOptions& opts = {},
                                              const ScenarioTree<Scalar>* tree = nullptr) {
  constants.validate();
  MonotonicityReport<Scalar> rep;
  rep.selected_case = constants.selected_case;
  const char* names[3] = {"initial_map", "terminal_map", "coefficients"};
  for (int i = 0; i < 3; ++i) {
    rep.case_one[std::size_t(i)].name = names[i];
    rep.case_two[std::size_t(i)].name = names[i];
  }

  for (int t = 0; t < samples; ++t) {
    RngStream rng(seed, "check_monotonicity", static_cast<std::uint64_t>(t));
    MarginWitness<Scalar> w;
    w.k = static_cast<int>(rng.uniform_index(std::max(1, model.horizon)));
    w.node = tree ? rng.uniform_index(tree->num_nodes(w.k)) : 0;
    const Index nodeN = tree ? rng.uniform_index(tree->num_nodes(tree->horizon())) : 0;
    auto draw = [&] { return rng.template uniform_vector<Scalar>(model.n, opts.box_lo, opts.box_hi); };
    w.x = draw();
    w.xbar = draw();
    w.y = draw();
    w.ybar = draw();
    w.z = draw();
    w.zbar = draw();
    w.u = rng.template uniform_vector<Scalar>(model.m, opts.box_lo, opts.box_hi);

    const VecX<Scalar> xhat = w.x - w.xbar, yhat = w.y - w.ybar, zhat = w.z - w.zbar;

    const Scalar lam_ip = (model.initial_map(w.y) - model.initial_map(w.ybar)).dot(yhat);
    const Scalar phi_ip =
        (model.terminal_map(nodeN, w.x) - model.terminal_map(nodeN, w.xbar)).dot(xhat);
    const Scalar gamma_ip =
        (model.driver(w.k, w.node, w.x, w.y, w.z, w.u) -
         model.driver(w.k, w.node, w.xbar, w.ybar, w.zbar, w.u))
            .dot(xhat) +
        (model.drift(w.k, w.node, w.x, w.y, w.z, w.u) -
         model.drift(w.k, w.node, w.xbar, w.ybar, w.zbar, w.u))
            .dot(yhat) +
        (model.diffusion(w.k, w.node, w.x, w.y, w.z, w.u) -
         model.diffusion(w.k, w.node, w.xbar, w.ybar, w.zbar, w.u))
            .dot(zhat);

    const Scalar m_term = constants.mu * (constants.M * yhat).squaredNorm();
    const Scalar g_term = constants.v * (constants.G * xhat).squaredNorm();
    const Scalar a_term = constants.v * (constants.A_at(w.k) * xhat).squaredNorm();
    const Scalar bc_term =
        constants.mu * (constants.B_at(w.k) * yhat + constants.C_at(w.k) * zhat).squaredNorm();

    // case 1: <dLambda,yhat> <= -m, <dPhi,xhat> >= g, <dGamma,theta> <= -a-bc
    rep.case_one[0].update(-m_term - lam_ip, w);
    rep.case_one[1].update(phi_ip - g_term, w);
    rep.case_one[2].update(-a_term - bc_term - gamma_ip, w);
    // case 2: reversed signs
    rep.case_two[0].update(lam_ip - m_term, w);
    rep.case_two[1].update(-g_term - phi_ip, w);
    rep.case_two[2].update(gamma_ip - a_term - bc_term, w);
  }
  return rep;
}

}  // namespace fbsdelta
