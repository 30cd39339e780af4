#pragma once

#include <Eigen/LU>
#include <limits>
#include <tuple>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbsdelta/model.hpp"
#include "fbsdelta/scenario_tree.hpp"

namespace fbsdelta {

// Flat offsets for per-node vector blocks of width `dim` over levels 0..last.
class ProcessLayout {
 public:
  ProcessLayout() = default;
  ProcessLayout(const std::vector<Index>& level_counts, Index dim, int last_level) : dim_(dim) {
    prefix_.resize(static_cast<std::size_t>(last_level) + 2, 0);
    for (int k = 0; k <= last_level; ++k)
      prefix_[std::size_t(k) + 1] = prefix_[std::size_t(k)] + level_counts[std::size_t(k)];
  }
  Index offset(int level, Index node) const {
    return (prefix_[static_cast<std::size_t>(level)] + node) * dim_;
  }
  Index size() const { return prefix_.back() * dim_; }
  Index dim() const { return dim_; }
  // inverse of offset, for diagnostics
  std::pair<int, Index> locate(Index flat) const {
    const Index block = flat / dim_;
    int level = 0;
    while (prefix_[static_cast<std::size_t>(level) + 1] <= block) ++level;
    return {level, block - prefix_[static_cast<std::size_t>(level)]};
  }

 private:
  Index dim_ = 0;
  std::vector<Index> prefix_{0};
};

template <typename Scalar>
struct FBSolution {
  AdaptedProcess<Scalar> x, y;  // levels 0..N
  // one-step predictors derived from y: slices at levels 0..N-1
  std::vector<MatX<Scalar>> y_pred, z_pred;
  Scalar residual_norm = std::numeric_limits<Scalar>::infinity();
  int iterations = 0;
};

template <typename Scalar>
struct ResidualReport {
  VecX<Scalar> stacked;
  Scalar max_norm = 0;
};

template <typename Scalar>
struct SolveOptions {
  Scalar tol = Scalar(1e-10);  // residual sup norm
  int max_iter = 50;
  bool fd_jacobian = false;  // debug: replace the analytic Jacobian
  Scalar fd_step = Scalar(1e-7);
  Scalar certification_tol = Scalar(1e-8);  // gate for downstream consumers
};

namespace detail {

template <typename Scalar>
std::pair<std::vector<MatX<Scalar>>, std::vector<MatX<Scalar>>> predictors(
    const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& y) {
  const int N = tree.horizon();
  std::vector<MatX<Scalar>> yp(static_cast<std::size_t>(N)), zp(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    yp[std::size_t(k)] = cond_expect_next(tree, y.at(k + 1), k);
    zp[std::size_t(k)] = cond_expect_weighted(tree, y.at(k + 1), k);
  }
  return {std::move(yp), std::move(zp)};
}

template <typename Scalar>
void require_control(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                     const AdaptedProcess<Scalar>& u) {
  if (u.dim() != model.m) throw ShapeMismatch("control dimension differs from model.m");
  for (int k = 0; k < tree.horizon(); ++k) {
    require_level(tree, u, k, "control");
    const auto& set = control_set_at(model.controls, k);
    for (Index i = 0; i < tree.num_nodes(k); ++i)
      if (!set.contains(VecX<Scalar>(u.col(k, i))))
        throw ControlOutsideSet("u_" + std::to_string(k) + " at node " +
                                tree.history(k, i) + " lies outside U_k");
  }
}

// Stacks the state/backward/boundary equations of the coupled system and,
// when requested, the Jacobian with respect to the flat unknown [x | y].
// Row order: x0 boundary; per level k, per node: backward equation then one
// forward equation per child; terminal boundary per level-N node.
template <typename Scalar>
void assemble_fb(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                 const AdaptedProcess<Scalar>& u, const AdaptedProcess<Scalar>& x,
                 const AdaptedProcess<Scalar>& y, VecX<Scalar>& resid, MatX<Scalar>* jac) {
  const int N = tree.horizon();
  const Index n = model.n;
  const ProcessLayout lay(tree.level_counts(), n, N);
  const Index xbase = 0, ybase = lay.size();
  const Index total = 2 * lay.size();
  resid.setZero(total);
  if (jac) jac->setZero(total, total);

  auto [yp, zp] = predictors(tree, y);

  Index row = 0;
  // x_0 = initial_map(y_0)
  const VecX<Scalar> y0 = y.col(0, 0);
  resid.segment(row, n) = VecX<Scalar>(x.col(0, 0)) - model.initial_map(y0);
  if (jac) {
    jac->block(row, xbase + lay.offset(0, 0), n, n).setIdentity();
    jac->block(row, ybase + lay.offset(0, 0), n, n) = -model.initial_map_dy(y0);
  }
  row += n;

  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    const Index bc = spec.size();
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const VecX<Scalar> xi = x.col(k, i);
      const VecX<Scalar> yi = yp[std::size_t(k)].col(i);
      const VecX<Scalar> zi = zp[std::size_t(k)].col(i);
      const VecX<Scalar> ui = u.col(k, i);

      // y_k + driver(k+1) = 0
      resid.segment(row, n) = VecX<Scalar>(y.col(k, i)) + model.driver(k, i, xi, yi, zi, ui);
      if (jac) {
        jac->block(row, ybase + lay.offset(k, i), n, n).setIdentity();
        jac->block(row, xbase + lay.offset(k, i), n, n) += model.driver_x(k, i, xi, yi, zi, ui);
        const MatX<Scalar> fy = model.driver_y(k, i, xi, yi, zi, ui);
        const MatX<Scalar> fz = model.driver_z(k, i, xi, yi, zi, ui);
        for (Index c = 0; c < bc; ++c)
          jac->block(row, ybase + lay.offset(k + 1, tree.child(k, i, c)), n, n) +=
              spec.probability(c) * (fy + spec.value(c) * fz);
      }
      row += n;

      // x_{k+1}(child) = drift + diffusion * w_b, one equation per child
      const VecX<Scalar> bv = model.drift(k, i, xi, yi, zi, ui);
      const VecX<Scalar> sv = model.diffusion(k, i, xi, yi, zi, ui);
      MatX<Scalar> bx, by, bz, sx, sy, sz;
      if (jac) {
        bx = model.drift_x(k, i, xi, yi, zi, ui);
        by = model.drift_y(k, i, xi, yi, zi, ui);
        bz = model.drift_z(k, i, xi, yi, zi, ui);
        sx = model.diffusion_x(k, i, xi, yi, zi, ui);
        sy = model.diffusion_y(k, i, xi, yi, zi, ui);
        sz = model.diffusion_z(k, i, xi, yi, zi, ui);
      }
      for (Index b = 0; b < bc; ++b) {
        const Scalar w = spec.value(b);
        const Index ch = tree.child(k, i, b);
        resid.segment(row, n) = VecX<Scalar>(x.col(k + 1, ch)) - bv - sv * w;
        if (jac) {
          jac->block(row, xbase + lay.offset(k + 1, ch), n, n).setIdentity();
          jac->block(row, xbase + lay.offset(k, i), n, n) -= bx + w * sx;
          for (Index c = 0; c < bc; ++c)
            jac->block(row, ybase + lay.offset(k + 1, tree.child(k, i, c)), n, n) -=
                spec.probability(c) * (by + w * sy + spec.value(c) * (bz + w * sz));
        }
        row += n;
      }
    }
  }

  // y_N = terminal_map(x_N)
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    const VecX<Scalar> xN = x.col(N, j);
    resid.segment(row, n) = VecX<Scalar>(y.col(N, j)) - model.terminal_map(j, xN);
    if (jac) {
      jac->block(row, ybase + lay.offset(N, j), n, n).setIdentity();
      jac->block(row, xbase + lay.offset(N, j), n, n) = -model.terminal_map_dx(j, xN);
    }
    row += n;
  }
}

template <typename Scalar>
void unflatten_fb(const ScenarioTree<Scalar>& tree, Index n, const VecX<Scalar>& flat,
                  AdaptedProcess<Scalar>& x, AdaptedProcess<Scalar>& y) {
  const int N = tree.horizon();
  const ProcessLayout lay(tree.level_counts(), n, N);
  for (int k = 0; k <= N; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      x.col(k, i) = flat.segment(lay.offset(k, i), n);
      y.col(k, i) = flat.segment(lay.size() + lay.offset(k, i), n);
    }
}

template <typename Scalar>
VecX<Scalar> flatten_fb(const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& x,
                        const AdaptedProcess<Scalar>& y) {
  const int N = tree.horizon();
  const Index n = x.dim();
  const ProcessLayout lay(tree.level_counts(), n, N);
  VecX<Scalar> flat(2 * lay.size());
  for (int k = 0; k <= N; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      flat.segment(lay.offset(k, i), n) = x.col(k, i);
      flat.segment(lay.size() + lay.offset(k, i), n) = y.col(k, i);
    }
  return flat;
}

template <typename Scalar>
void require_model_tree(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree) {
  if (model.horizon < tree.horizon())
    throw ShapeMismatch("model horizon shorter than tree horizon");
  if (model.n <= 0 || model.m < 0) throw ShapeMismatch("model dimensions not set");
}

}  // namespace detail

// Stacked residual of the full coupled system at a candidate solution. The
// predictors are recomputed from the candidate y before any coefficient is
// evaluated.
template <typename Scalar>
ResidualReport<Scalar> residual(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                                const AdaptedProcess<Scalar>& u,
                                const FBSolution<Scalar>& candidate) {
  detail::require_model_tree(model, tree);
  detail::require_control(model, tree, u);
  if (candidate.x.dim() != model.n || candidate.y.dim() != model.n)
    throw ShapeMismatch("candidate dimension differs from model.n");
  for (int k = 0; k <= tree.horizon(); ++k) {
    detail::require_level(tree, candidate.x, k, "candidate.x");
    detail::require_level(tree, candidate.y, k, "candidate.y");
  }
  ResidualReport<Scalar> rep;
  detail::assemble_fb(model, tree, u, candidate.x, candidate.y, rep.stacked,
                      static_cast<MatX<Scalar>*>(nullptr));
  rep.max_norm = rep.stacked.size() ? rep.stacked.cwiseAbs().maxCoeff() : Scalar(0);
  return rep;
}

// Global Newton over the stacked node values of (x, y), with plain step
// halving (at most 30 halvings per iteration). `iterations` counts Newton
// passes including the final accepting check.
template <typename Scalar>
FBSolution<Scalar> solve_newton(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                                const AdaptedProcess<Scalar>& u,
                                std::optional<FBSolution<Scalar>> init = std::nullopt,
                                const SolveOptions<Scalar>& opts = {}) {
  detail::require_model_tree(model, tree);
  detail::require_control(model, tree, u);
  const int N = tree.horizon();
  const Index n = model.n;

  FBSolution<Scalar> sol;
  sol.x = init ? init->x : AdaptedProcess<Scalar>::zeros(tree, n, N);
  sol.y = init ? init->y : AdaptedProcess<Scalar>::zeros(tree, n, N);

  VecX<Scalar> resid;
  MatX<Scalar> jac;
  detail::assemble_fb(model, tree, u, sol.x, sol.y, resid, static_cast<MatX<Scalar>*>(nullptr));
  Scalar norm = resid.cwiseAbs().maxCoeff();
  Scalar best = norm;

  for (int it = 1; it <= opts.max_iter; ++it) {
    if (norm <= opts.tol) {
      sol.residual_norm = norm;
      sol.iterations = it;
      std::tie(sol.y_pred, sol.z_pred) = detail::predictors(tree, sol.y);
      return sol;
    }
    VecX<Scalar> flat = detail::flatten_fb(tree, sol.x, sol.y);
    if (opts.fd_jacobian) {
      detail::assemble_fb(model, tree, u, sol.x, sol.y, resid,
                          static_cast<MatX<Scalar>*>(nullptr));
      jac.resize(flat.size(), flat.size());
      AdaptedProcess<Scalar> px = sol.x, py = sol.y;
      VecX<Scalar> bumped;
      for (Index j = 0; j < flat.size(); ++j) {
        VecX<Scalar> probe = flat;
        const Scalar h = opts.fd_step * std::max(Scalar(1), std::abs(flat[j]));
        probe[j] += h;
        detail::unflatten_fb(tree, n, probe, px, py);
        detail::assemble_fb(model, tree, u, px, py, bumped, static_cast<MatX<Scalar>*>(nullptr));
        jac.col(j) = (bumped - resid) / h;
      }
    } else {
      detail::assemble_fb(model, tree, u, sol.x, sol.y, resid, &jac);
    }

    Eigen::PartialPivLU<MatX<Scalar>> lu(jac);
    const Scalar min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot < Scalar(kSingularPivot)) {
      Index bad = 0;
      lu.matrixLU().diagonal().cwiseAbs().minCoeff(&bad);
      const ProcessLayout lay(tree.level_counts(), n, N);
      const Index half = lay.size();
      const auto [lvl, node] = lay.locate(bad < half ? bad : bad - half);
      throw SingularJacobian("Newton Jacobian is singular",
                             std::string(bad < half ? "x" : "y") + " block, level " +
                                 std::to_string(lvl) + ", node " + tree.history(lvl, node));
    }
    const VecX<Scalar> step = lu.solve(-resid);

    Scalar lambda = 1;
    VecX<Scalar> trial_resid;
    AdaptedProcess<Scalar> tx = sol.x, ty = sol.y;
    for (int halving = 0;; ++halving) {
      detail::unflatten_fb(tree, n, VecX<Scalar>(flat + lambda * step), tx, ty);
      detail::assemble_fb(model, tree, u, tx, ty, trial_resid,
                          static_cast<MatX<Scalar>*>(nullptr));
      const Scalar trial_norm = trial_resid.cwiseAbs().maxCoeff();
      if (trial_norm < norm || halving >= 30) {
        sol.x = tx;
        sol.y = ty;
        resid = trial_resid;
        norm = trial_norm;
        break;
      }
      lambda *= Scalar(0.5);
    }
    best = std::min(best, norm);
  }
  if (norm <= opts.tol) {
    sol.residual_norm = norm;
    sol.iterations = opts.max_iter;
    std::tie(sol.y_pred, sol.z_pred) = detail::predictors(tree, sol.y);
    return sol;
  }
  throw NonConvergence("Newton did not reach tolerance", static_cast<double>(best),
                       opts.max_iter);
}

// Damped backward/forward sweep iteration. One sweep recurses y backward from
// the terminal map with fresh predictors, then x forward from the initial
// map, and relaxes toward the new iterate. Stops when the successive-iterate
// sup distance is at most tol.
template <typename Scalar>
FBSolution<Scalar> solve_picard(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                                const AdaptedProcess<Scalar>& u, Scalar relaxation,
                                const SolveOptions<Scalar>& opts = {}) {
  detail::require_model_tree(model, tree);
  detail::require_control(model, tree, u);
  if (!(relaxation > Scalar(0) && relaxation <= Scalar(1)))
    throw InvariantViolation("relaxation must lie in (0, 1]");
  const int N = tree.horizon();
  const Index n = model.n;

  AdaptedProcess<Scalar> x = AdaptedProcess<Scalar>::zeros(tree, n, N);
  AdaptedProcess<Scalar> y = AdaptedProcess<Scalar>::zeros(tree, n, N);

  for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
    // backward: y_N = terminal_map(x_N); y_k = -driver(k+1) with predictors
    // from the fresh y_{k+1}
    AdaptedProcess<Scalar> ynew = AdaptedProcess<Scalar>::zeros(tree, n, N);
    for (Index j = 0; j < tree.num_nodes(N); ++j)
      ynew.col(N, j) = model.terminal_map(j, VecX<Scalar>(x.col(N, j)));
    for (int k = N - 1; k >= 0; --k) {
      const MatX<Scalar> yp = cond_expect_next(tree, ynew.at(k + 1), k);
      const MatX<Scalar> zp = cond_expect_weighted(tree, ynew.at(k + 1), k);
      for (Index i = 0; i < tree.num_nodes(k); ++i)
        ynew.col(k, i) = -model.driver(k, i, VecX<Scalar>(x.col(k, i)), VecX<Scalar>(yp.col(i)),
                                       VecX<Scalar>(zp.col(i)), VecX<Scalar>(u.col(k, i)));
    }
    // forward: x_0 = initial_map(y_0); x_{k+1} from the drift and diffusion
    AdaptedProcess<Scalar> xnew = AdaptedProcess<Scalar>::zeros(tree, n, N);
    xnew.col(0, 0) = model.initial_map(VecX<Scalar>(ynew.col(0, 0)));
    for (int k = 0; k < N; ++k) {
      const auto& spec = tree.branch(k);
      const MatX<Scalar> yp = cond_expect_next(tree, ynew.at(k + 1), k);
      const MatX<Scalar> zp = cond_expect_weighted(tree, ynew.at(k + 1), k);
      for (Index i = 0; i < tree.num_nodes(k); ++i) {
        const VecX<Scalar> bv = model.drift(k, i, VecX<Scalar>(xnew.col(k, i)),
                                            VecX<Scalar>(yp.col(i)), VecX<Scalar>(zp.col(i)),
                                            VecX<Scalar>(u.col(k, i)));
        const VecX<Scalar> sv = model.diffusion(k, i, VecX<Scalar>(xnew.col(k, i)),
                                                VecX<Scalar>(yp.col(i)), VecX<Scalar>(zp.col(i)),
                                                VecX<Scalar>(u.col(k, i)));
        for (Index b = 0; b < spec.size(); ++b)
          xnew.col(k + 1, tree.child(k, i, b)) = bv + sv * spec.value(b);
      }
    }

    Scalar dist = 0;
    for (int k = 0; k <= N; ++k) {
      dist = std::max(dist, (xnew.at(k) - x.at(k)).cwiseAbs().maxCoeff());
      dist = std::max(dist, (ynew.at(k) - y.at(k)).cwiseAbs().maxCoeff());
    }
    for (int k = 0; k <= N; ++k) {
      x.at(k) = (Scalar(1) - relaxation) * x.at(k) + relaxation * xnew.at(k);
      y.at(k) = (Scalar(1) - relaxation) * y.at(k) + relaxation * ynew.at(k);
    }
    if (relaxation * dist <= opts.tol) {
      FBSolution<Scalar> sol;
      sol.x = std::move(x);
      sol.y = std::move(y);
      sol.iterations = sweep;
      std::tie(sol.y_pred, sol.z_pred) = detail::predictors(tree, sol.y);
      VecX<Scalar> resid;
      detail::assemble_fb(model, tree, u, sol.x, sol.y, resid,
                          static_cast<MatX<Scalar>*>(nullptr));
      sol.residual_norm = resid.cwiseAbs().maxCoeff();
      return sol;
    }
  }
  throw NonConvergence("Picard sweeps did not contract to tolerance",
                       std::numeric_limits<double>::infinity(), opts.max_iter);
}

// Cost functional: E terminal_cost(x_N) + initial_cost(y_0) + sum_k E
// running_cost(k). Requires a certified solution.
template <typename Scalar>
Scalar cost(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
            const AdaptedProcess<Scalar>& u, const FBSolution<Scalar>& sol,
            Scalar certification_tol = Scalar(1e-8)) {
  if (!(sol.residual_norm <= certification_tol))
    throw UncertifiedSolution("solution residual " + std::to_string(sol.residual_norm) +
                              " exceeds certification tolerance");
  const int N = tree.horizon();
  auto [yp, zp] = detail::predictors(tree, sol.y);

  MatX<Scalar> terminal(1, tree.num_nodes(N));
  for (Index j = 0; j < tree.num_nodes(N); ++j)
    terminal(0, j) = model.terminal_cost(j, VecX<Scalar>(sol.x.col(N, j)));
  Scalar total = total_expectation(tree, terminal, N)[0];
  total += model.initial_cost(VecX<Scalar>(sol.y.col(0, 0)));
  for (int k = 0; k < N; ++k) {
    MatX<Scalar> stage(1, tree.num_nodes(k));
    for (Index i = 0; i < tree.num_nodes(k); ++i)
      stage(0, i) = model.running_cost(k, i, VecX<Scalar>(sol.x.col(k, i)),
                                       VecX<Scalar>(yp[std::size_t(k)].col(i)),
                                       VecX<Scalar>(zp[std::size_t(k)].col(i)),
                                       VecX<Scalar>(u.col(k, i)));
    total += total_expectation(tree, stage, k)[0];
  }
  return total;
}

// Empirical probe of the two-control stability estimate: the solution-pair
// energy over the coefficient-difference energy. The constant is recorded,
// not asserted, because the estimate's K is not pinned numerically.
template <typename Scalar>
struct StabilityRatio {
  Scalar energy = 0;  // sum_k E|x-xbar|^2 + E|y-ybar|^2
  Scalar ihat = 0;    // coefficient-difference energy
  Scalar ratio = 0;
};

template <typename Scalar>
StabilityRatio<Scalar> stability_ratio(const ModelSpec<Scalar>& model,
                                       const ScenarioTree<Scalar>& tree,
                                       const AdaptedProcess<Scalar>& u,
                                       const FBSolution<Scalar>& sol,
                                       const AdaptedProcess<Scalar>& u_bar,
                                       const FBSolution<Scalar>& sol_bar) {
  const int N = tree.horizon();
  StabilityRatio<Scalar> out;
  out.energy = expected_square_distance(tree, sol.x, sol_bar.x, 0, N) +
               expected_square_distance(tree, sol.y, sol_bar.y, 0, N);

  // the driver term mixes the two argument tuples; the drift/diffusion terms
  // differ in the control only
  for (int k = 0; k < N; ++k) {
    MatX<Scalar> diff(1, tree.num_nodes(k));
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const VecX<Scalar> xb = sol_bar.x.col(k, i);
      const VecX<Scalar> ypb = sol_bar.y_pred[std::size_t(k)].col(i);
      const VecX<Scalar> zpb = sol_bar.z_pred[std::size_t(k)].col(i);
      const VecX<Scalar> ui = u.col(k, i);
      const VecX<Scalar> ub = u_bar.col(k, i);
      const VecX<Scalar> x1 = sol.x.col(k, i);
      const VecX<Scalar> yp1 = sol.y_pred[std::size_t(k)].col(i);
      const VecX<Scalar> zp1 = sol.z_pred[std::size_t(k)].col(i);
      Scalar s = (model.drift(k, i, xb, ypb, zpb, ui) - model.drift(k, i, xb, ypb, zpb, ub))
                     .squaredNorm();
      s += (model.diffusion(k, i, xb, ypb, zpb, ui) - model.diffusion(k, i, xb, ypb, zpb, ub))
               .squaredNorm();
      s += (model.driver(k, i, x1, yp1, zp1, ui) - model.driver(k, i, xb, ypb, zpb, ub))
               .squaredNorm();
      diff(0, i) = s;
    }
    out.ihat += total_expectation(tree, diff, k)[0];
  }
  out.ratio = out.energy / out.ihat;
  return out;
}

}  // namespace fbsdelta
