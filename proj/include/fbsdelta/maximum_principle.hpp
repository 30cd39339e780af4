#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbsdelta/adjoint.hpp"
#include "fbsdelta/fbsde_solver.hpp"

namespace fbsdelta {

// u + delta_{ks} eps v: the control perturbed at the single time s.
template <typename Scalar>
AdaptedProcess<Scalar> spike_perturb(const AdaptedProcess<Scalar>& u,
                                     const AdaptedProcess<Scalar>& v, int s, Scalar eps) {
  if (u.dim() != v.dim()) throw ShapeMismatch("direction dimension differs from control");
  AdaptedProcess<Scalar> out = u;
  out.at(s) += eps * v.at(s);
  return out;
}

template <typename Scalar>
AdaptedProcess<Scalar> spike_perturb(const AdaptedProcess<Scalar>& u,
                                     const AdaptedProcess<Scalar>& v, int s, Scalar eps,
                                     const std::vector<ControlSet<Scalar>>& controls) {
  AdaptedProcess<Scalar> out = spike_perturb(u, v, s, eps);
  const auto& set = control_set_at(controls, s);
  for (Index i = 0; i < out.at(s).cols(); ++i)
    if (!set.contains(VecX<Scalar>(out.col(s, i))))
      throw ControlOutsideSet("perturbed control leaves U_" + std::to_string(s));
  return out;
}

// Solved pair used by several probes below.
template <typename Scalar>
struct SolvedPoint {
  FBSolution<Scalar> fb;
  AdjointSolution<Scalar> adj;
};

template <typename Scalar>
SolvedPoint<Scalar> solve_point(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                                const AdaptedProcess<Scalar>& u,
                                const SolveOptions<Scalar>& opts = {}) {
  SolvedPoint<Scalar> pt;
  pt.fb = solve_newton(model, tree, u, std::nullopt, opts);
  pt.adj = solve_adjoint(model, tree, u, pt.fb, opts.certification_tol);
  return pt;
}

// First-order variation of the cost under a spike at time s in direction v:
// E <H_u(s), v_s> at the solved triple.
template <typename Scalar>
Scalar gateaux_derivative(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                          const AdaptedProcess<Scalar>& u_star, const AdaptedProcess<Scalar>& v,
                          int s, const SolvedPoint<Scalar>& at) {
  const MatX<Scalar> hu = hu_slice(model, tree, u_star, at.fb, at.adj, s);
  MatX<Scalar> prods = (hu.array() * v.at(s).array()).colwise().sum().matrix();
  return total_expectation(tree, prods, s)[0];
}

template <typename Scalar>
Scalar gateaux_derivative(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                          const AdaptedProcess<Scalar>& u_star, const AdaptedProcess<Scalar>& v,
                          int s, const SolveOptions<Scalar>& opts = {}) {
  return gateaux_derivative(model, tree, u_star, v, s, solve_point(model, tree, u_star, opts));
}

// Sum of the per-spike derivatives over all times (one solve).
template <typename Scalar>
Scalar gateaux_derivative_sum(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                              const AdaptedProcess<Scalar>& u_star,
                              const AdaptedProcess<Scalar>& v,
                              const SolveOptions<Scalar>& opts = {}) {
  const auto at = solve_point(model, tree, u_star, opts);
  Scalar total = 0;
  for (int s = 0; s < tree.horizon(); ++s)
    total += gateaux_derivative(model, tree, u_star, v, s, at);
  return total;
}

template <typename Scalar>
struct FdResult {
  Scalar slope = 0;
  Scalar error_estimate = 0;
  bool central = false;
  std::vector<std::pair<Scalar, Scalar>> curve;  // (eps, J(u^eps)) including eps = 0
};

namespace detail {

// Neville extrapolation to h = 0 of (h_i, d_i).
template <typename Scalar>
std::pair<Scalar, Scalar> neville_to_zero(std::vector<Scalar> h, std::vector<Scalar> d) {
  const std::size_t n = d.size();
  Scalar prev = d.back();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i)
      d[i] = (h[i] * d[i + 1] - h[i + level] * d[i]) / (h[i] - h[i + level]);
  const Scalar best = d[0];
  using std::abs;
  return {best, n > 1 ? abs(best - prev) : abs(best)};
}

}  // namespace detail

// Numerical slope of eps -> J(u^eps) at 0 by full re-solves: central
// differences when the backward point is admissible, otherwise one-sided with
// extrapolation across the eps schedule. The error estimate comes from
// successive extrapolants.
template <typename Scalar>
FdResult<Scalar> fd_derivative(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                               const AdaptedProcess<Scalar>& u_star,
                               const AdaptedProcess<Scalar>& v, int s,
                               std::vector<Scalar> epsilons, const SolveOptions<Scalar>& opts = {}) {
  if (epsilons.empty()) epsilons = {Scalar(1e-2), Scalar(1e-3), Scalar(1e-4)};
  for (Scalar e : epsilons)
    if (!(e > Scalar(0) && e <= Scalar(1)))
      throw InvariantViolation("epsilons must lie in (0, 1]");
  std::sort(epsilons.begin(), epsilons.end(), std::greater<Scalar>());

  const auto& set = control_set_at(model.controls, s);
  bool central = true;
  for (Scalar e : epsilons) {
    const AdaptedProcess<Scalar> back = spike_perturb(u_star, v, s, -e);
    for (Index i = 0; i < back.at(s).cols() && central; ++i)
      central = set.contains(VecX<Scalar>(back.col(s, i)));
    if (!central) break;
  }

  FdResult<Scalar> out;
  out.central = central;
  const FBSolution<Scalar> base = solve_newton(model, tree, u_star, std::nullopt, opts);
  const Scalar j0 = cost(model, tree, u_star, base, opts.certification_tol);
  out.curve.emplace_back(Scalar(0), j0);

  auto j_at = [&](Scalar eps) {
    const AdaptedProcess<Scalar> ue = spike_perturb(u_star, v, s, eps);
    const FBSolution<Scalar> sol = solve_newton(model, tree, ue, base, opts);
    const Scalar j = cost(model, tree, ue, sol, opts.certification_tol);
    out.curve.emplace_back(eps, j);
    return j;
  };

  std::vector<Scalar> hs, slopes;
  for (Scalar e : epsilons) {
    const Scalar jp = j_at(e);
    if (central) {
      const Scalar jm = j_at(-e);
      slopes.push_back((jp - jm) / (Scalar(2) * e));
      hs.push_back(e * e);  // central differences expand in eps^2
    } else {
      slopes.push_back((jp - j0) / e);
      hs.push_back(e);
    }
  }
  std::tie(out.slope, out.error_estimate) = detail::neville_to_zero(hs, slopes);
  return out;
}

// Analytic-versus-numeric comparison of the variational formula for one spike.
template <typename Scalar>
struct VariationReport {
  int s = 0;
  Scalar analytic = 0;
  Scalar numeric = 0;
  Scalar abs_gap = 0;
  Scalar rel_gap = 0;
  std::vector<Scalar> epsilon_schedule;
  std::vector<std::pair<Scalar, Scalar>> curve;
};

template <typename Scalar>
VariationReport<Scalar> variation_report(const ModelSpec<Scalar>& model,
                                         const ScenarioTree<Scalar>& tree,
                                         const AdaptedProcess<Scalar>& u_star,
                                         const AdaptedProcess<Scalar>& v, int s,
                                         std::vector<Scalar> epsilons = {},
                                         const SolveOptions<Scalar>& opts = {}) {
  VariationReport<Scalar> rep;
  rep.s = s;
  rep.analytic = gateaux_derivative(model, tree, u_star, v, s, opts);
  FdResult<Scalar> fd = fd_derivative(model, tree, u_star, v, s, epsilons, opts);
  rep.numeric = fd.slope;
  using std::abs;
  rep.abs_gap = abs(rep.analytic - rep.numeric);
  rep.rel_gap = rep.abs_gap / std::max(Scalar(1), abs(rep.analytic));
  rep.epsilon_schedule = std::move(epsilons);
  rep.curve = std::move(fd.curve);
  return rep;
}

// ---------------------------------------------------------------------------
// Necessary condition scan
// ---------------------------------------------------------------------------

template <typename Scalar>
struct NecessityEntry {
  int k = 0;
  Index node = 0;
  Scalar margin = 0;   // min over sampled u of <H_u, u - u*>
  Scalar hu_norm = 0;  // ||H_u|| (the reported metric when U = R^m)
  VecX<Scalar> witness_u;
};

template <typename Scalar>
struct NecessityReport {
  std::vector<NecessityEntry<Scalar>> entries;
  Scalar global_min_margin = std::numeric_limits<Scalar>::infinity();
  Scalar max_hu_norm = 0;
  int worst_k = -1;
  Index worst_node = 0;
  VecX<Scalar> worst_u;
  bool all_of_space = false;
};

// Scans every positive-probability node: for boxes, samples vertices plus
// random interior points and records the worst inner product
// <H_u*(k), u - u_k*>; for U = R^m the condition forces H_u = 0, so the
// reported metric is ||H_u|| (margins over sampled directions are still
// recorded).
template <typename Scalar>
NecessityReport<Scalar> check_necessary(const ModelSpec<Scalar>& model,
                                        const ScenarioTree<Scalar>& tree,
                                        const AdaptedProcess<Scalar>& u_star,
                                        const std::vector<ControlSet<Scalar>>& controls,
                                        int samples, std::uint64_t seed,
                                        const SolveOptions<Scalar>& opts = {}) {
  const auto at = solve_point(model, tree, u_star, opts);
  NecessityReport<Scalar> rep;
  rep.all_of_space = true;
  for (int k = 0; k < tree.horizon(); ++k) {
    const auto& set = control_set_at(controls, k);
    if (set.kind != ControlSet<Scalar>::Kind::AllOfSpace) rep.all_of_space = false;
    const MatX<Scalar> hu = hu_slice(model, tree, u_star, at.fb, at.adj, k);
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      NecessityEntry<Scalar> ent;
      ent.k = k;
      ent.node = i;
      const VecX<Scalar> g = hu.col(i);
      const VecX<Scalar> ui = u_star.col(k, i);
      ent.hu_norm = g.norm();
      ent.margin = std::numeric_limits<Scalar>::infinity();
      auto consider = [&](const VecX<Scalar>& u_cand) {
        const Scalar ip = g.dot(u_cand - ui);
        if (ip < ent.margin) {
          ent.margin = ip;
          ent.witness_u = u_cand;
        }
      };
      for (const auto& vert : set.vertices()) consider(vert);
      RngStream rng(seed, "check_necessary",
                    (static_cast<std::uint64_t>(k) << 32) ^ static_cast<std::uint64_t>(i));
      for (int t = 0; t < samples; ++t) consider(set.kind == ControlSet<Scalar>::Kind::Box
                                                     ? set.sample(rng)
                                                     : VecX<Scalar>(ui + set.sample(rng)));
      rep.max_hu_norm = std::max(rep.max_hu_norm, ent.hu_norm);
      if (ent.margin < rep.global_min_margin) {
        rep.global_min_margin = ent.margin;
        rep.worst_k = k;
        rep.worst_node = i;
        rep.worst_u = ent.witness_u;
      }
      rep.entries.push_back(std::move(ent));
    }
  }
  return rep;
}

template <typename Scalar>
NecessityReport<Scalar> check_necessary(const ModelSpec<Scalar>& model,
                                        const ScenarioTree<Scalar>& tree,
                                        const AdaptedProcess<Scalar>& u_star, int samples,
                                        std::uint64_t seed, const SolveOptions<Scalar>& opts = {}) {
  return check_necessary(model, tree, u_star, model.controls, samples, seed, opts);
}

// ---------------------------------------------------------------------------
// Sufficiency audit
// ---------------------------------------------------------------------------

enum class ConditionStatus { StructurallyExact, HoldsOnSamples, ViolatedWithWitness };

enum class BoundaryStructure {
  PhiLinear_LambdaConstant,
  PhiConstant_LambdaLinear,
  NeitherViolated,
};

inline const char* to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::StructurallyExact: return "structurally-exact";
    case ConditionStatus::HoldsOnSamples: return "holds-on-samples";
    case ConditionStatus::ViolatedWithWitness: return "violated-with-witness";
  }
  return "?";
}

inline const char* to_string(BoundaryStructure s) {
  switch (s) {
    case BoundaryStructure::PhiLinear_LambdaConstant: return "terminal-linear/initial-constant";
    case BoundaryStructure::PhiConstant_LambdaLinear: return "terminal-constant/initial-linear";
    case BoundaryStructure::NeitherViolated: return "neither-structural-case";
  }
  return "?";
}

template <typename Scalar>
struct SufficiencyAudit {
  BoundaryStructure boundary_structure = BoundaryStructure::NeitherViolated;
  ConditionStatus boundary_status = ConditionStatus::ViolatedWithWitness;    // (i)
  ConditionStatus cost_convexity = ConditionStatus::HoldsOnSamples;          // (ii)
  ConditionStatus hamiltonian_convexity = ConditionStatus::HoldsOnSamples;   // (iii)
  ConditionStatus pointwise_minimum = ConditionStatus::HoldsOnSamples;       // (iv)
  Scalar cost_margin = std::numeric_limits<Scalar>::infinity();
  Scalar hamiltonian_margin = std::numeric_limits<Scalar>::infinity();
  Scalar minimum_margin = std::numeric_limits<Scalar>::infinity();
};

// Audits the sufficiency hypotheses at a solved candidate: (i) the declared
// boundary structure, (ii) midpoint convexity of the terminal and initial
// costs, (iii) midpoint convexity of H in (x, y, z, u) at the solved adjoint
// values, (iv) pointwise minimality of H at u* over sampled controls.
template <typename Scalar>
SufficiencyAudit<Scalar> audit_sufficient(const ModelSpec<Scalar>& model,
                                          const ScenarioTree<Scalar>& tree,
                                          const AdaptedProcess<Scalar>& u_star, int samples,
                                          std::uint64_t seed, const SolveOptions<Scalar>& opts = {},
                                          const CheckerOptions& box = {}) {
  const auto at = solve_point(model, tree, u_star, opts);
  SufficiencyAudit<Scalar> audit;

  const bool phi_lin = model.terminal_map_kind == BoundaryKind::Linear;
  const bool phi_const = model.terminal_map_kind == BoundaryKind::Constant;
  const bool lam_lin = model.initial_map_kind == BoundaryKind::Linear;
  const bool lam_const = model.initial_map_kind == BoundaryKind::Constant;
  if (phi_lin && lam_const) {
    audit.boundary_structure = BoundaryStructure::PhiLinear_LambdaConstant;
    audit.boundary_status = ConditionStatus::StructurallyExact;
  } else if (phi_const && (lam_lin || lam_const)) {
    audit.boundary_structure = BoundaryStructure::PhiConstant_LambdaLinear;
    audit.boundary_status = ConditionStatus::StructurallyExact;
  } else {
    audit.boundary_structure = BoundaryStructure::NeitherViolated;
    audit.boundary_status = ConditionStatus::ViolatedWithWitness;
  }

  const int N = tree.horizon();
  // (ii) midpoint convexity of terminal and initial costs
  for (int t = 0; t < samples; ++t) {
    RngStream rng(seed, "audit_cost_convexity", static_cast<std::uint64_t>(t));
    const Index nodeN = rng.uniform_index(tree.num_nodes(N));
    const VecX<Scalar> a = rng.template uniform_vector<Scalar>(model.n, box.box_lo, box.box_hi);
    const VecX<Scalar> b = rng.template uniform_vector<Scalar>(model.n, box.box_lo, box.box_hi);
    using std::abs;
    {
      const Scalar ga = model.terminal_cost(nodeN, a), gb = model.terminal_cost(nodeN, b);
      const Scalar gm = model.terminal_cost(nodeN, VecX<Scalar>((a + b) / Scalar(2)));
      const Scalar slack = (ga + gb) / Scalar(2) - gm;
      audit.cost_margin = std::min(audit.cost_margin, slack);
      if (slack < -Scalar(1e-12) * std::max(Scalar(1), abs(ga) + abs(gb)))
        audit.cost_convexity = ConditionStatus::ViolatedWithWitness;
    }
    {
      const Scalar ga = model.initial_cost(a), gb = model.initial_cost(b);
      const Scalar gm = model.initial_cost(VecX<Scalar>((a + b) / Scalar(2)));
      const Scalar slack = (ga + gb) / Scalar(2) - gm;
      audit.cost_margin = std::min(audit.cost_margin, slack);
      if (slack < -Scalar(1e-12) * std::max(Scalar(1), abs(ga) + abs(gb)))
        audit.cost_convexity = ConditionStatus::ViolatedWithWitness;
    }
  }

  // (iii) midpoint convexity of H in (x, y, z, u) at solved adjoint values
  for (int t = 0; t < samples; ++t) {
    RngStream rng(seed, "audit_hamiltonian_convexity", static_cast<std::uint64_t>(t));
    const int k = static_cast<int>(rng.uniform_index(N));
    const Index i = rng.uniform_index(tree.num_nodes(k));
    HamiltonianPoint<Scalar> pa = detail::hamiltonian_point(tree, k, i, at.fb, u_star, at.adj);
    HamiltonianPoint<Scalar> pb = pa, pm = pa;
    auto draw_state = [&] {
      return rng.template uniform_vector<Scalar>(model.n, box.box_lo, box.box_hi);
    };
    pa.x = draw_state(); pa.y = draw_state(); pa.z = draw_state();
    pa.u = rng.template uniform_vector<Scalar>(model.m, box.box_lo, box.box_hi);
    pb.x = draw_state(); pb.y = draw_state(); pb.z = draw_state();
    pb.u = rng.template uniform_vector<Scalar>(model.m, box.box_lo, box.box_hi);
    pm.x = (pa.x + pb.x) / Scalar(2);
    pm.y = (pa.y + pb.y) / Scalar(2);
    pm.z = (pa.z + pb.z) / Scalar(2);
    pm.u = (pa.u + pb.u) / Scalar(2);
    const Scalar ha = hamiltonian(model, pa), hb = hamiltonian(model, pb),
                 hm = hamiltonian(model, pm);
    const Scalar slack = (ha + hb) / Scalar(2) - hm;
    audit.hamiltonian_margin = std::min(audit.hamiltonian_margin, slack);
    using std::abs;
    if (slack < -Scalar(1e-12) * std::max(Scalar(1), abs(ha) + abs(hb)))
      audit.hamiltonian_convexity = ConditionStatus::ViolatedWithWitness;
  }

  // (iv) H(k, ., u*) <= H(k, ., u) over sampled u
  for (int k = 0; k < N; ++k) {
    const auto& set = control_set_at(model.controls, k);
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      HamiltonianPoint<Scalar> pt = detail::hamiltonian_point(tree, k, i, at.fb, u_star, at.adj);
      const Scalar h_star = hamiltonian(model, pt);
      RngStream rng(seed, "audit_pointwise_minimum",
                    (static_cast<std::uint64_t>(k) << 32) ^ static_cast<std::uint64_t>(i));
      const int per_node = std::max(1, samples / std::max<int>(1, N));
      for (int t = 0; t < per_node; ++t) {
        pt.u = set.kind == ControlSet<Scalar>::Kind::Box
                   ? set.sample(rng)
                   : VecX<Scalar>(u_star.col(k, i)) + set.sample(rng);
        const Scalar slack = hamiltonian(model, pt) - h_star;
        audit.minimum_margin = std::min(audit.minimum_margin, slack);
        if (slack < -Scalar(1e-8))
          audit.pointwise_minimum = ConditionStatus::ViolatedWithWitness;
      }
    }
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Difference representation and spike scaling
// ---------------------------------------------------------------------------

// Right side of the difference representation of J(u) - J(u*): the stage
// Hamiltonian gaps minus their linearizations, the boundary-cost gaps minus
// their linearizations, and the boundary-map linearization defects paired
// with the adjoint boundary values. Exact (up to solver tolerance) for any
// admissible pair, not just spike perturbations.
template <typename Scalar>
Scalar difference_representation(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                                 const AdaptedProcess<Scalar>& u_star,
                                 const SolvedPoint<Scalar>& star,
                                 const AdaptedProcess<Scalar>& u_alt,
                                 const FBSolution<Scalar>& alt) {
  const int N = tree.horizon();
  Scalar total = 0;

  for (int k = 0; k < N; ++k) {
    MatX<Scalar> stage(1, tree.num_nodes(k));
    for (Index i = 0; i < tree.num_nodes(k); ++i) {
      HamiltonianPoint<Scalar> p_star =
          detail::hamiltonian_point(tree, k, i, star.fb, u_star, star.adj);
      HamiltonianPoint<Scalar> p_alt = p_star;  // same adjoint slots
      p_alt.x = alt.x.col(k, i);
      p_alt.y = alt.y_pred[std::size_t(k)].col(i);
      p_alt.z = alt.z_pred[std::size_t(k)].col(i);
      p_alt.u = u_alt.col(k, i);
      const auto g = hamiltonian_grads(model, p_star);
      stage(0, i) = hamiltonian(model, p_alt) - hamiltonian(model, p_star) -
                    (p_alt.x - p_star.x).dot(g.x) - (p_alt.y - p_star.y).dot(g.y) -
                    (p_alt.z - p_star.z).dot(g.z);
    }
    total += total_expectation(tree, stage, k)[0];
  }

  MatX<Scalar> terminal(1, tree.num_nodes(N));
  for (Index j = 0; j < tree.num_nodes(N); ++j) {
    const VecX<Scalar> xs = star.fb.x.col(N, j), xa = alt.x.col(N, j);
    const VecX<Scalar> xhat = xa - xs;
    Scalar term = model.terminal_cost(j, xa) - model.terminal_cost(j, xs) -
                  xhat.dot(model.terminal_cost_dx(j, xs));
    term += (model.terminal_map_dx(j, xs) * xhat - model.terminal_map(j, xa) +
             model.terminal_map(j, xs))
                .dot(VecX<Scalar>(star.adj.r.col(N, j)));
    terminal(0, j) = term;
  }
  total += total_expectation(tree, terminal, N)[0];

  const VecX<Scalar> ys = star.fb.y.col(0, 0), ya = alt.y.col(0, 0);
  const VecX<Scalar> yhat = ya - ys;
  total += model.initial_cost(ya) - model.initial_cost(ys) -
           yhat.dot(model.initial_cost_dy(ys));
  total += (model.initial_map(ya) - model.initial_map(ys) - model.initial_map_dy(ys) * yhat)
               .dot(VecX<Scalar>(star.adj.p.col(0, 0)));
  return total;
}

// log-log slope of the spike-perturbed state-difference energy against eps.
template <typename Scalar>
struct SpikeScaling {
  std::vector<Scalar> epsilons;
  std::vector<Scalar> energies;  // sum_k E|x^eps - x*|^2 + E|y^eps - y*|^2
  Scalar slope = 0;
};

template <typename Scalar>
SpikeScaling<Scalar> spike_scaling_probe(const ModelSpec<Scalar>& model,
                                         const ScenarioTree<Scalar>& tree,
                                         const AdaptedProcess<Scalar>& u_star,
                                         const AdaptedProcess<Scalar>& v, int s,
                                         std::vector<Scalar> epsilons,
                                         const SolveOptions<Scalar>& opts = {}) {
  SpikeScaling<Scalar> out;
  out.epsilons = epsilons;
  const FBSolution<Scalar> base = solve_newton(model, tree, u_star, std::nullopt, opts);
  const int N = tree.horizon();
  for (Scalar e : epsilons) {
    const AdaptedProcess<Scalar> ue = spike_perturb(u_star, v, s, e);
    const FBSolution<Scalar> sol = solve_newton(model, tree, ue, base, opts);
    out.energies.push_back(expected_square_distance(tree, sol.x, base.x, 0, N) +
                           expected_square_distance(tree, sol.y, base.y, 0, N));
  }
  // least-squares slope in log-log coordinates
  using std::log;
  const auto count = static_cast<Scalar>(epsilons.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const Scalar lx = log(epsilons[i]);
    const Scalar ly = log(out.energies[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return out;
}

}  // namespace fbsdelta
