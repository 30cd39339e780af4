#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <memory>
#include <utility>
#include <vector>

#include "fbsdelta/adjoint.hpp"
#include "fbsdelta/fbsde_solver.hpp"

namespace fbsdelta {

// Per-stage matrix data of the linear-quadratic system
//   x_{k+1} = A x_k - Q y'_{k+1} + C1 u_k + (B' x_k - L z'_{k+1} + C2 u_k) w_k
//   y_k     = A' y'_{k+1} + B z'_{k+1} + C3 u_k
// with running cost (x' D x + y'' R y' + z'' S z' + u' C4 u) / 2.
template <typename Scalar>
struct LQStageData {
  MatX<Scalar> A, B, Q, L;      // n x n
  MatX<Scalar> C1, C2, C3;      // n x m
  MatX<Scalar> C4;              // m x m
  MatX<Scalar> D, R, S;         // n x n, symmetric PSD
};

// Coefficient bundle of the LQ problem. Stage data and the terminal target may
// vary per node at their level (one entry broadcasts). Boundary data: x_0 =
// -N_mat y_0, y_N = eta, terminal cost x' MN x / 2 and initial cost
// y' M0 y / 2. The horizon and the initial-coupling matrix are distinct
// objects here even though the classical formulation overloads one symbol for
// both.
template <typename Scalar>
struct LQCoefficients {
  Index n = 0, m = 0;
  int horizon = 0;
  std::vector<std::vector<LQStageData<Scalar>>> stages;  // stages[k]: size 1 or num_nodes(k)
  MatX<Scalar> M0, MN;      // symmetric positive definite
  MatX<Scalar> N_mat;       // symmetric; couples x_0 to y_0
  std::vector<VecX<Scalar>> eta;  // size 1 or num_nodes(N)
  Scalar delta = Scalar(1e-6);    // uniform positivity margin for C4

  const LQStageData<Scalar>& data(int k, Index node) const {
    const auto& lv = stages[static_cast<std::size_t>(k)];
    return lv.size() == 1 ? lv[0] : lv[static_cast<std::size_t>(node)];
  }
  const VecX<Scalar>& eta_at(Index node) const {
    return eta.size() == 1 ? eta[0] : eta[static_cast<std::size_t>(node)];
  }

  // uniform per-stage construction
  static LQCoefficients uniform(int horizon, LQStageData<Scalar> stage, MatX<Scalar> M0,
                                MatX<Scalar> MN, MatX<Scalar> N_mat, VecX<Scalar> eta) {
    LQCoefficients c;
    c.n = stage.A.rows();
    c.m = stage.C1.cols();
    c.horizon = horizon;
    c.stages.assign(static_cast<std::size_t>(horizon), {stage});
    c.M0 = std::move(M0);
    c.MN = std::move(MN);
    c.N_mat = std::move(N_mat);
    c.eta = {std::move(eta)};
    return c;
  }

  void validate() const {
    if (n <= 0 || m <= 0 || horizon < 1) throw InvariantViolation("LQ dimensions not set");
    if (static_cast<int>(stages.size()) != horizon)
      throw InvariantViolation("LQ stage list length differs from horizon");
    auto check_dims = [&](const MatX<Scalar>& mtx, Index rows, Index cols, const char* what) {
      if (mtx.rows() != rows || mtx.cols() != cols)
        throw InvariantViolation(std::string(what) + " has wrong shape");
      if (!mtx.allFinite()) throw InvariantViolation(std::string(what) + " is not finite");
    };
    auto min_eig = [](const MatX<Scalar>& sym) {
      Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sym);
      return es.eigenvalues().minCoeff();
    };
    auto check_sym = [&](const MatX<Scalar>& mtx, const char* what) {
      if ((mtx - mtx.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
        throw InvariantViolation(std::string(what) + " must be symmetric");
    };
    for (int k = 0; k < horizon; ++k)
      for (const auto& st : stages[static_cast<std::size_t>(k)]) {
        check_dims(st.A, n, n, "A");
        check_dims(st.B, n, n, "B");
        check_dims(st.Q, n, n, "Q");
        check_dims(st.L, n, n, "L");
        check_dims(st.C1, n, m, "C1");
        check_dims(st.C2, n, m, "C2");
        check_dims(st.C3, n, m, "C3");
        check_dims(st.C4, m, m, "C4");
        check_dims(st.D, n, n, "D");
        check_dims(st.R, n, n, "R");
        check_dims(st.S, n, n, "S");
        check_sym(st.D, "D");
        check_sym(st.R, "R");
        check_sym(st.S, "S");
        if (min_eig(st.D) < Scalar(-1e-12) || min_eig(st.R) < Scalar(-1e-12) ||
            min_eig(st.S) < Scalar(-1e-12))
          throw InvariantViolation("D, R, S must be positive semidefinite");
        check_sym(st.C4, "C4");
        if (min_eig(st.C4) < delta)
          throw InvariantViolation("C4 fails delta-positivity (C4 - delta I must be PSD)");
      }
    check_dims(M0, n, n, "M0");
    check_dims(MN, n, n, "MN");
    check_dims(N_mat, n, n, "N_mat");
    check_sym(M0, "M0");
    check_sym(MN, "MN");
    if (min_eig(M0) <= Scalar(0) || min_eig(MN) <= Scalar(0))
      throw InvariantViolation("M0 and MN must be positive definite");
    // the generic initial boundary r_0 = -gamma_y - Lambda_y' p_0 matches the
    // LQ one r_0 = -M0 y_0 + N p_0 only for symmetric N; asymmetric N is
    // rejected rather than silently picking a side
    if ((N_mat - N_mat.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
      throw InvariantViolation("N_mat must be symmetric");
    for (const auto& e : eta)
      if (e.size() != n) throw InvariantViolation("eta has wrong dimension");
  }
};

template <typename Scalar>
struct LQSolution {
  AdaptedProcess<Scalar> x, y, p, r;  // levels 0..N
  AdaptedProcess<Scalar> u;           // levels 0..N-1
  Scalar cost = 0;
  Scalar kkt_residual = 0;
};

// The LQ bundle expressed as a generic coefficient bundle with exact analytic
// derivatives. The terminal map is the constant eta and the initial map is
// y -> -N_mat y.
template <typename Scalar>
ModelSpec<Scalar> as_model(const LQCoefficients<Scalar>& coeffs) {
  coeffs.validate();
  auto c = std::make_shared<const LQCoefficients<Scalar>>(coeffs);
  ModelSpec<Scalar> model;
  model.name = "lq";
  model.n = c->n;
  model.m = c->m;
  model.horizon = c->horizon;
  using V = VecX<Scalar>;

  model.drift = [c](int k, Index i, const V& x, const V& y, const V&, const V& u) {
    const auto& st = c->data(k, i);
    return V(st.A * x - st.Q * y + st.C1 * u);
  };
  model.diffusion = [c](int k, Index i, const V& x, const V&, const V& z, const V& u) {
    const auto& st = c->data(k, i);
    return V(st.B.transpose() * x - st.L * z + st.C2 * u);
  };
  model.driver = [c](int k, Index i, const V&, const V& y, const V& z, const V& u) {
    const auto& st = c->data(k, i);
    return V(-(st.A.transpose() * y + st.B * z + st.C3 * u));
  };
  model.running_cost = [c](int k, Index i, const V& x, const V& y, const V& z, const V& u) {
    const auto& st = c->data(k, i);
    return Scalar(0.5) * (x.dot(st.D * x) + y.dot(st.R * y) + z.dot(st.S * z) + u.dot(st.C4 * u));
  };

  auto zero_nn = [c](int, Index, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>::Zero(c->n, c->n).eval();
  };
  model.drift_x = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return c->data(k, i).A;
  };
  model.drift_y = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(-c->data(k, i).Q);
  };
  model.drift_z = zero_nn;
  model.drift_u = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return c->data(k, i).C1;
  };
  model.diffusion_x = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(c->data(k, i).B.transpose());
  };
  model.diffusion_y = zero_nn;
  model.diffusion_z = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(-c->data(k, i).L);
  };
  model.diffusion_u = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return c->data(k, i).C2;
  };
  model.driver_x = zero_nn;
  model.driver_y = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(-c->data(k, i).A.transpose());
  };
  model.driver_z = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(-c->data(k, i).B);
  };
  model.driver_u = [c](int k, Index i, const V&, const V&, const V&, const V&) {
    return MatX<Scalar>(-c->data(k, i).C3);
  };
  model.running_cost_x = [c](int k, Index i, const V& x, const V&, const V&, const V&) {
    return V(c->data(k, i).D * x);
  };
  model.running_cost_y = [c](int k, Index i, const V&, const V& y, const V&, const V&) {
    return V(c->data(k, i).R * y);
  };
  model.running_cost_z = [c](int k, Index i, const V&, const V&, const V& z, const V&) {
    return V(c->data(k, i).S * z);
  };
  model.running_cost_u = [c](int k, Index i, const V&, const V&, const V&, const V& u) {
    return V(c->data(k, i).C4 * u);
  };

  model.initial_map = [c](const V& y) { return V(-(c->N_mat * y)); };
  model.initial_map_dy = [c](const V&) { return MatX<Scalar>(-c->N_mat); };
  model.terminal_map = [c](Index node, const V&) { return c->eta_at(node); };
  model.terminal_map_dx = [c](Index, const V&) {
    return MatX<Scalar>::Zero(c->n, c->n).eval();
  };
  model.terminal_cost = [c](Index, const V& x) { return Scalar(0.5) * x.dot(c->MN * x); };
  model.terminal_cost_dx = [c](Index, const V& x) { return V(c->MN * x); };
  model.initial_cost = [c](const V& y) { return Scalar(0.5) * y.dot(c->M0 * y); };
  model.initial_cost_dy = [c](const V& y) { return V(c->M0 * y); };

  model.controls = {ControlSet<Scalar>::all_of_space(c->m)};
  model.initial_map_kind = BoundaryKind::Linear;
  model.terminal_map_kind = BoundaryKind::Constant;
  return model;
}

// The explicit dual representation of the optimal control at one node:
// u = C4^{-1} (-C1' p' - C2' q' + C3' r).
template <typename Scalar>
VecX<Scalar> explicit_control(const LQCoefficients<Scalar>& coeffs, int k, Index node,
                              const VecX<Scalar>& p_pred, const VecX<Scalar>& q_pred,
                              const VecX<Scalar>& r) {
  const auto& st = coeffs.data(k, node);
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(st.C4);
  if (es.eigenvalues().minCoeff() < coeffs.delta)
    throw SingularC4("C4 violates the uniform positivity margin");
  const VecX<Scalar> rhs = -(st.C1.transpose() * p_pred) - st.C2.transpose() * q_pred +
                           st.C3.transpose() * r;
  return st.C4.ldlt().solve(rhs);
}

// Direct evaluation of the quadratic cost for given (x, y, u).
template <typename Scalar>
Scalar lq_cost(const LQCoefficients<Scalar>& coeffs, const ScenarioTree<Scalar>& tree,
               const AdaptedProcess<Scalar>& x, const AdaptedProcess<Scalar>& y,
               const AdaptedProcess<Scalar>& u) {
  const int N = tree.horizon();
  MatX<Scalar> terminal(1, tree.num_nodes(N));
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    const VecX<Scalar> xN = x.col(N, j);
    terminal(0, j) = xN.dot(coeffs.MN * xN);
  }
  Scalar total = total_expectation(tree, terminal, N)[0];
  const VecX<Scalar> y0 = y.col(0, 0);
  total += y0.dot(coeffs.M0 * y0);
  for (int k = 0; k < N; ++k) {
    const MatX<Scalar> yp = cond_expect_next(tree, y.at(k + 1), k);
    const MatX<Scalar> zp = cond_expect_weighted(tree, y.at(k + 1), k);
    MatX<Scalar> stage(1, tree.num_nodes(k));
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const auto& st = coeffs.data(k, i);
      const VecX<Scalar> xi = x.col(k, i), yi = yp.col(i), zi = zp.col(i), ui = u.col(k, i);
      stage(0, i) =
          xi.dot(st.D * xi) + yi.dot(st.R * yi) + zi.dot(st.S * zi) + ui.dot(st.C4 * ui);
    }
    total += total_expectation(tree, stage, k)[0];
  }
  return Scalar(0.5) * total;
}

// One-shot solve of the coupled optimality system: state dynamics and
// boundaries, adjoint recursions and boundaries, and the stationarity
// condition C1' p' + C2' q' - C3' r + C4 u = 0, assembled over all node
// unknowns (x, y, p, r, u) and eliminated directly.
template <typename Scalar>
LQSolution<Scalar> solve_lq(const LQCoefficients<Scalar>& coeffs,
                            const ScenarioTree<Scalar>& tree) {
  coeffs.validate();
  if (coeffs.horizon < tree.horizon())
    throw ShapeMismatch("LQ horizon shorter than tree horizon");
  const int N = tree.horizon();
  const Index n = coeffs.n, m = coeffs.m;

  const ProcessLayout state_lay(tree.level_counts(), n, N);
  const ProcessLayout ctrl_lay(tree.level_counts(), m, N - 1);
  const Index xb = 0;
  const Index yb = xb + state_lay.size();
  const Index pb = yb + state_lay.size();
  const Index rb = pb + state_lay.size();
  const Index ub = rb + state_lay.size();
  const Index total = ub + ctrl_lay.size();

  MatX<Scalar> mat = MatX<Scalar>::Zero(total, total);
  VecX<Scalar> rhs = VecX<Scalar>::Zero(total);
  Index row = 0;

  // x_0 + N_mat y_0 = 0
  mat.block(row, xb + state_lay.offset(0, 0), n, n).setIdentity();
  mat.block(row, yb + state_lay.offset(0, 0), n, n) = coeffs.N_mat;
  row += n;

  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    const Index bc = spec.size();
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const auto& st = coeffs.data(k, i);
      // y_k - A' y'_{k+1} - B z'_{k+1} - C3 u_k = 0
      mat.block(row, yb + state_lay.offset(k, i), n, n).setIdentity();
      for (Index c = 0; c < bc; ++c)
        mat.block(row, yb + state_lay.offset(k + 1, tree.child(k, i, c)), n, n) -=
            spec.probability(c) * (st.A.transpose() + spec.value(c) * st.B);
      mat.block(row, ub + ctrl_lay.offset(k, i), n, m) = -st.C3;
      row += n;
      // x_{k+1}(child) - A x_k + Q y' - C1 u - w (B' x_k - L z' + C2 u) = 0
      for (Index b = 0; b < bc; ++b) {
        const Scalar w = spec.value(b);
        mat.block(row, xb + state_lay.offset(k + 1, tree.child(k, i, b)), n, n).setIdentity();
        mat.block(row, xb + state_lay.offset(k, i), n, n) =
            -(st.A + w * st.B.transpose());
        for (Index c = 0; c < bc; ++c)
          mat.block(row, yb + state_lay.offset(k + 1, tree.child(k, i, c)), n, n) +=
              spec.probability(c) * (st.Q + w * spec.value(c) * st.L);
        mat.block(row, ub + ctrl_lay.offset(k, i), n, m) = -(st.C1 + w * st.C2);
        row += n;
      }
    }
  }
  // y_N = eta
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    mat.block(row, yb + state_lay.offset(N, j), n, n).setIdentity();
    rhs.segment(row, n) = coeffs.eta_at(j);
    row += n;
  }

  // r_0 + M0 y_0 - N_mat' p_0 = 0
  mat.block(row, rb + state_lay.offset(0, 0), n, n).setIdentity();
  mat.block(row, yb + state_lay.offset(0, 0), n, n) = coeffs.M0;
  mat.block(row, pb + state_lay.offset(0, 0), n, n) = -coeffs.N_mat.transpose();
  row += n;

  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    const Index bc = spec.size();
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const auto& st = coeffs.data(k, i);
      // p_k - A' p' - B q' - D x_k = 0
      mat.block(row, pb + state_lay.offset(k, i), n, n).setIdentity();
      for (Index c = 0; c < bc; ++c)
        mat.block(row, pb + state_lay.offset(k + 1, tree.child(k, i, c)), n, n) -=
            spec.probability(c) * (st.A.transpose() + spec.value(c) * st.B);
      mat.block(row, xb + state_lay.offset(k, i), n, n) = -st.D;
      row += n;
      // r_{k+1}(child) - Q' p' - A r_k + R y' - w (L' q' + B' r_k - S z') = 0
      for (Index b = 0; b < bc; ++b) {
        const Scalar w = spec.value(b);
        mat.block(row, rb + state_lay.offset(k + 1, tree.child(k, i, b)), n, n).setIdentity();
        for (Index c = 0; c < bc; ++c) {
          mat.block(row, pb + state_lay.offset(k + 1, tree.child(k, i, c)), n, n) -=
              spec.probability(c) * (st.Q.transpose() + w * spec.value(c) * st.L.transpose());
          mat.block(row, yb + state_lay.offset(k + 1, tree.child(k, i, c)), n, n) +=
              spec.probability(c) * (st.R + w * spec.value(c) * st.S);
        }
        mat.block(row, rb + state_lay.offset(k, i), n, n) =
            -(st.A + w * st.B.transpose());
        row += n;
      }
    }
  }
  // p_N = MN x_N
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    mat.block(row, pb + state_lay.offset(N, j), n, n).setIdentity();
    mat.block(row, xb + state_lay.offset(N, j), n, n) = -coeffs.MN;
    row += n;
  }
  // stationarity rows
  for (int k = 0; k < N; ++k) {
    const auto& spec = tree.branch(k);
    const Index bc = spec.size();
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      const auto& st = coeffs.data(k, i);
      for (Index c = 0; c < bc; ++c)
        mat.block(row, pb + state_lay.offset(k + 1, tree.child(k, i, c)), m, n) +=
            spec.probability(c) *
            (st.C1.transpose() + spec.value(c) * st.C2.transpose());
      mat.block(row, rb + state_lay.offset(k, i), m, n) = -st.C3.transpose();
      mat.block(row, ub + ctrl_lay.offset(k, i), m, m) = st.C4;
      row += m;
    }
  }

  Eigen::PartialPivLU<MatX<Scalar>> lu(mat);
  const Scalar min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot < Scalar(kSingularPivot)) {
    Eigen::FullPivLU<MatX<Scalar>> full(mat);
    full.setThreshold(Scalar(kSingularPivot));
    throw SingularSystem("LQ optimality system is singular", total - full.rank());
  }
  const VecX<Scalar> flat = lu.solve(rhs);

  LQSolution<Scalar> sol;
  sol.x = AdaptedProcess<Scalar>::zeros(tree, n, N);
  sol.y = AdaptedProcess<Scalar>::zeros(tree, n, N);
  sol.p = AdaptedProcess<Scalar>::zeros(tree, n, N);
  sol.r = AdaptedProcess<Scalar>::zeros(tree, n, N);
  sol.u = AdaptedProcess<Scalar>::zeros(tree, m, N - 1);
  for (int k = 0; k <= N; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      sol.x.col(k, i) = flat.segment(xb + state_lay.offset(k, i), n);
      sol.y.col(k, i) = flat.segment(yb + state_lay.offset(k, i), n);
      sol.p.col(k, i) = flat.segment(pb + state_lay.offset(k, i), n);
      sol.r.col(k, i) = flat.segment(rb + state_lay.offset(k, i), n);
    }
  for (int k = 0; k < N; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i)
      sol.u.col(k, i) = flat.segment(ub + ctrl_lay.offset(k, i), m);

  // certify by replaying the full system
  sol.kkt_residual = (mat * flat - rhs).cwiseAbs().maxCoeff();
  sol.cost = lq_cost(coeffs, tree, sol.x, sol.y, sol.u);
  return sol;
}

// ---------------------------------------------------------------------------
// Energy-storage scheduling preset (scalar state and control)
// ---------------------------------------------------------------------------

// One storage unit dispatched over a finite horizon: x is the stored energy,
// u the dispatch (positive discharges), y the anticipated reserve requirement
// fed back into the dynamics, and z' the sensitivity of that requirement to
// the noise.
template <typename Scalar>
struct StorageParams {
  int horizon = 4;
  Scalar retention = Scalar(0.98);            // A: energy retained per step
  Scalar reserve_coupling = Scalar(0.05);     // Q: reserve feedback into the dynamics
  Scalar noise_state_gain = Scalar(0.02);     // B: state-driven noise exposure
  Scalar noise_sensitivity = Scalar(0.05);    // L: z-driven noise exposure
  Scalar dispatch_gain = Scalar(1);           // C1
  Scalar dispatch_noise_gain = Scalar(0.05);  // C2
  Scalar reserve_dispatch_gain = Scalar(0.1); // C3
  Scalar level_weight = Scalar(0.02);         // D
  Scalar reserve_weight = Scalar(0.01);       // R
  Scalar sensitivity_weight = Scalar(0.01);   // S
  Scalar effort_weight = Scalar(0.1);         // C4
  Scalar initial_coupling = Scalar(0.5);      // N_mat
  Scalar terminal_reserve = Scalar(0.5);      // eta
  Scalar initial_weight = Scalar(1);          // M0
  Scalar terminal_weight = Scalar(1);         // MN
};

template <typename Scalar>
LQCoefficients<Scalar> storage_preset(const StorageParams<Scalar>& p = {}) {
  auto scal = [](Scalar v) { return MatX<Scalar>::Constant(1, 1, v).eval(); };
  LQStageData<Scalar> st;
  st.A = scal(p.retention);
  st.B = scal(p.noise_state_gain);
  st.Q = scal(p.reserve_coupling);
  st.L = scal(p.noise_sensitivity);
  st.C1 = scal(p.dispatch_gain);
  st.C2 = scal(p.dispatch_noise_gain);
  st.C3 = scal(p.reserve_dispatch_gain);
  st.C4 = scal(p.effort_weight);
  st.D = scal(p.level_weight);
  st.R = scal(p.reserve_weight);
  st.S = scal(p.sensitivity_weight);
  VecX<Scalar> eta(1);
  eta[0] = p.terminal_reserve;
  auto coeffs = LQCoefficients<Scalar>::uniform(p.horizon, std::move(st),
                                                scal(p.initial_weight), scal(p.terminal_weight),
                                                scal(p.initial_coupling), std::move(eta));
  coeffs.validate();
  return coeffs;
}

// Constants under which the storage preset passes the domination and
// monotonicity sweeps (case 1, mu = 1): the initial-map scale is N_mat itself
// and the (y, z) scale stacks the reserve and sensitivity couplings.
template <typename Scalar>
MonotonicityConstants<Scalar> storage_constants(const StorageParams<Scalar>& p = {}) {
  MonotonicityConstants<Scalar> c;
  c.mu = Scalar(1);
  c.v = Scalar(0);
  c.selected_case = MonotonicityConstants<Scalar>::Case::One;
  c.M = MatX<Scalar>::Constant(1, 1, p.initial_coupling);
  c.G = MatX<Scalar>::Zero(1, 1);
  c.A = {MatX<Scalar>::Zero(1, 1)};
  MatX<Scalar> B(2, 1), C(2, 1);
  B << p.reserve_coupling, Scalar(0);
  C << Scalar(0), p.noise_sensitivity;
  c.B = {B};
  c.C = {C};
  return c;
}

}  // namespace fbsdelta
