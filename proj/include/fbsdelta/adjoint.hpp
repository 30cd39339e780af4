#pragma once

#include <Eigen/LU>
#include <tuple>
#include <vector>

#include "fbsdelta/fbsde_solver.hpp"

namespace fbsdelta {

// Argument tuple of the Hamiltonian at one (k, node): the y, z slots carry the
// predictors y'_{k+1}, z'_{k+1} and the p, q slots the adjoint predictors
// p'_{k+1}, q'_{k+1}; r is r_k.
template <typename Scalar>
struct HamiltonianPoint {
  int k = 0;
  Index node = 0;
  VecX<Scalar> x, y, z, u;
  VecX<Scalar> p, q, r;
};

// H = drift' p + diffusion' q + driver' r + running_cost.
template <typename Scalar>
Scalar hamiltonian(const ModelSpec<Scalar>& model, const HamiltonianPoint<Scalar>& pt) {
  if (pt.x.size() != model.n || pt.y.size() != model.n || pt.z.size() != model.n ||
      pt.p.size() != model.n || pt.q.size() != model.n || pt.r.size() != model.n)
    throw ShapeMismatch("Hamiltonian state/adjoint arguments differ from model.n");
  if (pt.u.size() != model.m) throw ShapeMismatch("Hamiltonian control differs from model.m");
  return model.drift(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).dot(pt.p) +
         model.diffusion(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).dot(pt.q) +
         model.driver(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).dot(pt.r) +
         model.running_cost(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u);
}

template <typename Scalar>
struct HamiltonianGradients {
  VecX<Scalar> x, y, z;  // R^n
  VecX<Scalar> u;        // R^m
};

// H_a = drift_a' p + diffusion_a' q + driver_a' r + running_cost_a.
template <typename Scalar>
HamiltonianGradients<Scalar> hamiltonian_grads(const ModelSpec<Scalar>& model,
                                               const HamiltonianPoint<Scalar>& pt) {
  if (pt.x.size() != model.n || pt.u.size() != model.m)
    throw ShapeMismatch("Hamiltonian arguments differ from model dimensions");
  HamiltonianGradients<Scalar> g;
  auto assemble = [&](const typename ModelSpec<Scalar>::MatFn& bd,
                      const typename ModelSpec<Scalar>::MatFn& sd,
                      const typename ModelSpec<Scalar>::MatFn& fd,
                      const typename ModelSpec<Scalar>::VecFn& ld) {
    return VecX<Scalar>(bd(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).transpose() * pt.p +
                        sd(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).transpose() * pt.q +
                        fd(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u).transpose() * pt.r +
                        ld(pt.k, pt.node, pt.x, pt.y, pt.z, pt.u));
  };
  g.x = assemble(model.drift_x, model.diffusion_x, model.driver_x, model.running_cost_x);
  g.y = assemble(model.drift_y, model.diffusion_y, model.driver_y, model.running_cost_y);
  g.z = assemble(model.drift_z, model.diffusion_z, model.driver_z, model.running_cost_z);
  g.u = assemble(model.drift_u, model.diffusion_u, model.driver_u, model.running_cost_u);
  return g;
}

// Solution of the coupled linear adjoint system. q is never stored: q'_{k+1}
// is always derived from p by the weighted conditional expectation.
template <typename Scalar>
struct AdjointSolution {
  AdaptedProcess<Scalar> p, r;  // levels 0..N
  std::vector<MatX<Scalar>> p_pred, q_pred;  // slices at levels 0..N-1
  Scalar residual_norm = std::numeric_limits<Scalar>::infinity();
};

namespace detail {

// Hamiltonian point at (k, i) assembled from a solved pair and adjoint slices.
template <typename Scalar>
HamiltonianPoint<Scalar> hamiltonian_point(const ScenarioTree<Scalar>&, int k, Index i,
                                           const FBSolution<Scalar>& fb,
                                           const AdaptedProcess<Scalar>& u,
                                           const AdjointSolution<Scalar>& adj) {
  HamiltonianPoint<Scalar> pt;
  pt.k = k;
  pt.node = i;
  pt.x = fb.x.col(k, i);
  pt.y = fb.y_pred[std::size_t(k)].col(i);
  pt.z = fb.z_pred[std::size_t(k)].col(i);
  pt.u = u.col(k, i);
  pt.p = adj.p_pred[std::size_t(k)].col(i);
  pt.q = adj.q_pred[std::size_t(k)].col(i);
  pt.r = adj.r.col(k, i);
  return pt;
}

// Residual of the adjoint equations at a candidate (p, r), replayed through
// the Hamiltonian gradients. Row order matches assemble_adjoint.
template <typename Scalar>
Scalar adjoint_replay_norm(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                           const AdaptedProcess<Scalar>& u, const FBSolution<Scalar>& fb,
                           const AdjointSolution<Scalar>& adj) {
  const int N = tree.horizon();
  Scalar worst = 0;
  const VecX<Scalar> y0 = fb.y.col(0, 0);
  worst = std::max(worst, (VecX<Scalar>(adj.r.col(0, 0)) + model.initial_cost_dy(y0) +
                           model.initial_map_dy(y0).transpose() * VecX<Scalar>(adj.p.col(0, 0)))
                              .cwiseAbs()
                              .maxCoeff());
  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const auto pt = hamiltonian_point(tree, k, i, fb, u, adj);
      const auto g = hamiltonian_grads(model, pt);
      worst = std::max(worst,
                       (VecX<Scalar>(adj.p.col(k, i)) - g.x).cwiseAbs().maxCoeff());
      for (Index b = 0; b < spec.size(); ++b) {
        const VecX<Scalar> rhs = -g.y - spec.value(b) * g.z;
        worst = std::max(
            worst, (VecX<Scalar>(adj.r.col(k + 1, tree.child(k, i, b))) - rhs).cwiseAbs()
                       .maxCoeff());
      }
    }
  }
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    const VecX<Scalar> xN = fb.x.col(N, j);
    worst = std::max(
        worst,
        (VecX<Scalar>(adj.p.col(N, j)) - model.terminal_cost_dx(j, xN) +
         model.terminal_map_dx(j, xN).transpose() * VecX<Scalar>(adj.r.col(N, j)))
            .cwiseAbs()
            .maxCoeff());
  }
  return worst;
}

}  // namespace detail

// Solves the coupled linear adjoint system for the admissible triple
// (u, x, y). r runs forward from r_0 while p runs backward from p_N and both
// boundaries couple p and r, so the system is assembled globally over all
// node values of (p, r) and eliminated directly.
template <typename Scalar>
AdjointSolution<Scalar> solve_adjoint(const ModelSpec<Scalar>& model,
                                      const ScenarioTree<Scalar>& tree,
                                      const AdaptedProcess<Scalar>& u,
                                      const FBSolution<Scalar>& fb,
                                      Scalar certification_tol = Scalar(1e-8)) {
  detail::require_model_tree(model, tree);
  if (!(fb.residual_norm <= certification_tol))
    throw UncertifiedSolution("forward-backward solution is not certified");
  const int N = tree.horizon();
  const Index n = model.n;
  const ProcessLayout lay(tree.level_counts(), n, N);
  const Index pbase = 0, rbase = lay.size();
  const Index total = 2 * lay.size();

  MatX<Scalar> mat = MatX<Scalar>::Zero(total, total);
  VecX<Scalar> rhs = VecX<Scalar>::Zero(total);

  Index row = 0;
  // r_0 + initial_map_dy' p_0 = -initial_cost_dy
  const VecX<Scalar> y0 = fb.y.col(0, 0);
  mat.block(row, rbase + lay.offset(0, 0), n, n).setIdentity();
  mat.block(row, pbase + lay.offset(0, 0), n, n) = model.initial_map_dy(y0).transpose();
  rhs.segment(row, n) = -model.initial_cost_dy(y0);
  row += n;

  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    const Index bc = spec.size();
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const VecX<Scalar> xi = fb.x.col(k, i);
      const VecX<Scalar> yi = fb.y_pred[std::size_t(k)].col(i);
      const VecX<Scalar> zi = fb.z_pred[std::size_t(k)].col(i);
      const VecX<Scalar> ui = u.col(k, i);
      const MatX<Scalar> bx = model.drift_x(k, i, xi, yi, zi, ui);
      const MatX<Scalar> by = model.drift_y(k, i, xi, yi, zi, ui);
      const MatX<Scalar> bz = model.drift_z(k, i, xi, yi, zi, ui);
      const MatX<Scalar> sx = model.diffusion_x(k, i, xi, yi, zi, ui);
      const MatX<Scalar> sy = model.diffusion_y(k, i, xi, yi, zi, ui);
      const MatX<Scalar> sz = model.diffusion_z(k, i, xi, yi, zi, ui);
      const MatX<Scalar> fx = model.driver_x(k, i, xi, yi, zi, ui);
      const MatX<Scalar> fy = model.driver_y(k, i, xi, yi, zi, ui);
      const MatX<Scalar> fz = model.driver_z(k, i, xi, yi, zi, ui);

      // p_k = H_x(k): p_k - sum_c p_c (bx + w_c sx)' p_{k+1}(c) - fx' r_k = l_x
      mat.block(row, pbase + lay.offset(k, i), n, n).setIdentity();
      for (Index c = 0; c < bc; ++c)
        mat.block(row, pbase + lay.offset(k + 1, tree.child(k, i, c)), n, n) -=
            spec.probability(c) * (bx + spec.value(c) * sx).transpose();
      mat.block(row, rbase + lay.offset(k, i), n, n) -= fx.transpose();
      rhs.segment(row, n) = model.running_cost_x(k, i, xi, yi, zi, ui);
      row += n;

      // r_{k+1}(child_b) = -H_y(k) - H_z(k) w_b, one equation per child
      for (Index b = 0; b < bc; ++b) {
        const Scalar w = spec.value(b);
        mat.block(row, rbase + lay.offset(k + 1, tree.child(k, i, b)), n, n).setIdentity();
        for (Index c = 0; c < bc; ++c)
          mat.block(row, pbase + lay.offset(k + 1, tree.child(k, i, c)), n, n) +=
              spec.probability(c) *
              ((by + spec.value(c) * sy) + w * (bz + spec.value(c) * sz)).transpose();
        mat.block(row, rbase + lay.offset(k, i), n, n) += (fy + w * fz).transpose();
        rhs.segment(row, n) = -model.running_cost_y(k, i, xi, yi, zi, ui) -
                              w * model.running_cost_z(k, i, xi, yi, zi, ui);
        row += n;
      }
    }
  }

  // p_N + terminal_map_dx' r_N = terminal_cost_dx
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    const VecX<Scalar> xN = fb.x.col(N, j);
    mat.block(row, pbase + lay.offset(N, j), n, n).setIdentity();
    mat.block(row, rbase + lay.offset(N, j), n, n) = model.terminal_map_dx(j, xN).transpose();
    rhs.segment(row, n) = model.terminal_cost_dx(j, xN);
    row += n;
  }

  Eigen::PartialPivLU<MatX<Scalar>> lu(mat);
  const Scalar min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot < Scalar(kSingularPivot)) {
    Eigen::FullPivLU<MatX<Scalar>> full(mat);
    full.setThreshold(Scalar(kSingularPivot));
    throw SingularSystem("adjoint system is singular", total - full.rank());
  }
  const VecX<Scalar> flat = lu.solve(rhs);

  AdjointSolution<Scalar> adj;
  adj.p = AdaptedProcess<Scalar>::zeros(tree, n, N);
  adj.r = AdaptedProcess<Scalar>::zeros(tree, n, N);
  for (int k = 0; k <= N; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      adj.p.col(k, i) = flat.segment(pbase + lay.offset(k, i), n);
      adj.r.col(k, i) = flat.segment(rbase + lay.offset(k, i), n);
    }
  adj.p_pred.resize(std::size_t(N));
  adj.q_pred.resize(std::size_t(N));
  for (int k = 0; k < N; ++k) {
    adj.p_pred[std::size_t(k)] = cond_expect_next(tree, adj.p.at(k + 1), k);
    adj.q_pred[std::size_t(k)] = cond_expect_weighted(tree, adj.p.at(k + 1), k);
  }
  adj.residual_norm = detail::adjoint_replay_norm(model, tree, u, fb, adj);
  if (!(adj.residual_norm <= certification_tol))
    throw UncertifiedSolution("adjoint replay residual " +
                              std::to_string(adj.residual_norm) +
                              " exceeds certification tolerance");
  return adj;
}

// Per-node H_u at level k for a solved triple, as an m x num_nodes(k) slice.
template <typename Scalar>
MatX<Scalar> hu_slice(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                      const AdaptedProcess<Scalar>& u, const FBSolution<Scalar>& fb,
                      const AdjointSolution<Scalar>& adj, int k) {
  MatX<Scalar> out(model.m, tree.num_nodes(k));
  for (Index i = 0; i < tree.num_nodes(k); ++i) {
    const auto pt = detail::hamiltonian_point(tree, k, i, fb, u, adj);
    out.col(i) = hamiltonian_grads(model, pt).u;
  }
  return out;
}

// Numerical residuals of the two summation-by-parts identities behind the
// difference representation: the telescoped boundary terms against the
// stage-wise expansions through the dynamics and the adjoint equations. Both
// vanish when the adjoint is exact, independently of how far u and u_bar are
// apart. The adjoint is the one solved at (u_bar, sol_bar).
template <typename Scalar>
struct DualityGap {
  Scalar x_side = 0;
  Scalar y_side = 0;
};

template <typename Scalar>
DualityGap<Scalar> duality_gap(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                               const AdaptedProcess<Scalar>& u, const FBSolution<Scalar>& sol,
                               const AdaptedProcess<Scalar>& u_bar,
                               const FBSolution<Scalar>& sol_bar,
                               const AdjointSolution<Scalar>& adj_bar) {
  const int N = tree.horizon();

  auto dot_expect = [&](const MatX<Scalar>& a, const MatX<Scalar>& b, int level) {
    MatX<Scalar> prods = (a.array() * b.array()).colwise().sum().matrix();
    return total_expectation(tree, prods, level)[0];
  };

  // x side: E<x^_N, p_N> - <x^_0, p_0> vs sum_k E[<db, p'> + <ds, q'> - <x^, H_x>]
  Scalar lhs_x = dot_expect(sol.x.at(N) - sol_bar.x.at(N), adj_bar.p.at(N), N) -
                 dot_expect(sol.x.at(0) - sol_bar.x.at(0), adj_bar.p.at(0), 0);
  Scalar rhs_x = 0;
  // y side: E<y^_N, r_N> - <y^_0, r_0> vs sum_k E[-<y'^, H_y> - <z'^, H_z> + <df, r_k>]
  Scalar lhs_y = dot_expect(sol.y.at(N) - sol_bar.y.at(N), adj_bar.r.at(N), N) -
                 dot_expect(sol.y.at(0) - sol_bar.y.at(0), adj_bar.r.at(0), 0);
  Scalar rhs_y = 0;

  for (int k = 0; k < N; ++k) {
    MatX<Scalar> stage_x(1, tree.num_nodes(k));
    MatX<Scalar> stage_y(1, tree.num_nodes(k));
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const VecX<Scalar> x1 = sol.x.col(k, i), xb = sol_bar.x.col(k, i);
      const VecX<Scalar> yp1 = sol.y_pred[std::size_t(k)].col(i),
                         ypb = sol_bar.y_pred[std::size_t(k)].col(i);
      const VecX<Scalar> zp1 = sol.z_pred[std::size_t(k)].col(i),
                         zpb = sol_bar.z_pred[std::size_t(k)].col(i);
      const VecX<Scalar> u1 = u.col(k, i), ub = u_bar.col(k, i);

      const auto pt = detail::hamiltonian_point(tree, k, i, sol_bar, u_bar, adj_bar);
      const auto g = hamiltonian_grads(model, pt);

      const VecX<Scalar> db = model.drift(k, i, x1, yp1, zp1, u1) -
                              model.drift(k, i, xb, ypb, zpb, ub);
      const VecX<Scalar> ds = model.diffusion(k, i, x1, yp1, zp1, u1) -
                              model.diffusion(k, i, xb, ypb, zpb, ub);
      const VecX<Scalar> df = model.driver(k, i, x1, yp1, zp1, u1) -
                              model.driver(k, i, xb, ypb, zpb, ub);

      stage_x(0, i) = db.dot(VecX<Scalar>(adj_bar.p_pred[std::size_t(k)].col(i))) +
                      ds.dot(VecX<Scalar>(adj_bar.q_pred[std::size_t(k)].col(i))) -
                      (x1 - xb).dot(g.x);
      stage_y(0, i) = -(yp1 - ypb).dot(g.y) - (zp1 - zpb).dot(g.z) +
                      df.dot(VecX<Scalar>(adj_bar.r.col(k, i)));
    }
    rhs_x += total_expectation(tree, stage_x, k)[0];
    rhs_y += total_expectation(tree, stage_y, k)[0];
  }

  using std::abs;
  return {abs(lhs_x - rhs_x), abs(lhs_y - rhs_y)};
}

}  // namespace fbsdelta
