#pragma once

// Random trees, processes and LQ instances for property and acceptance tests.
// Couplings are kept moderate so every generated instance is well-posed.

#include "fbsdelta/lq.hpp"
#include "fbsdelta/rng.hpp"
#include "fbsdelta/scenario_tree.hpp"

namespace fbsdelta::testing {

inline ScenarioTree<double> random_tree(RngStream& rng, Index max_leaves = 1024,
                                        int max_horizon = 8) {
  const int horizon = 1 + static_cast<int>(rng.uniform_index(max_horizon));
  std::vector<BranchSpec<double>> steps;
  Index leaves = 1;
  for (int k = 0; k < horizon; ++k) {
    const bool three = rng.uniform01() < 0.3 && leaves * 3 <= max_leaves;
    const bool two = leaves * 2 <= max_leaves;
    if (!two) {
      // no room to branch further: stop growing the horizon here
      break;
    }
    if (three) {
      steps.push_back(BranchSpec<double>::three_point(rng.uniform(0.1, 0.4)));
      leaves *= 3;
    } else if (rng.uniform01() < 0.5) {
      steps.push_back(BranchSpec<double>::two_point(rng.uniform(0.2, 0.8)));
      leaves *= 2;
    } else {
      steps.push_back(BranchSpec<double>::rademacher());
      leaves *= 2;
    }
  }
  if (steps.empty()) steps.push_back(BranchSpec<double>::rademacher());
  const int realized = static_cast<int>(steps.size());
  return ScenarioTree<double>(realized, std::move(steps));
}

inline AdaptedProcess<double> random_process(RngStream& rng, const ScenarioTree<double>& tree,
                                             Index dim, int last_level, double scale = 1.0) {
  auto p = AdaptedProcess<double>::zeros(tree, dim, last_level);
  for (int k = 0; k <= last_level; ++k)
    for (Index i = 0; i < tree.num_nodes(k); ++i)
      for (Index d = 0; d < dim; ++d) p.at(k)(d, i) = scale * rng.uniform(-1.0, 1.0);
  return p;
}

inline MatX<double> random_psd(RngStream& rng, Index n, double scale) {
  MatX<double> w(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) w(i, j) = rng.uniform(-1.0, 1.0);
  return MatX<double>(scale * (w.transpose() * w) / static_cast<double>(n));
}

inline MatX<double> random_matrix(RngStream& rng, Index rows, Index cols, double scale) {
  MatX<double> w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = scale * rng.uniform(-1.0, 1.0);
  return w;
}

// A random LQ instance satisfying the standing positivity assumptions, with
// couplings scaled so the stacked optimality system stays well-conditioned.
inline LQCoefficients<double> random_lq(RngStream& rng, Index n, Index m, int horizon) {
  LQStageData<double> st;
  st.A = MatX<double>::Identity(n, n) + random_matrix(rng, n, n, 0.3 / static_cast<double>(n));
  st.B = random_matrix(rng, n, n, 0.25 / static_cast<double>(n));
  st.Q = random_matrix(rng, n, n, 0.3 / static_cast<double>(n));
  st.L = random_matrix(rng, n, n, 0.25 / static_cast<double>(n));
  st.C1 = random_matrix(rng, n, m, 1.0);
  st.C2 = random_matrix(rng, n, m, 0.2);
  st.C3 = random_matrix(rng, n, m, 0.3);
  st.C4 = MatX<double>(random_psd(rng, m, 0.3) + 0.2 * MatX<double>::Identity(m, m));
  st.D = random_psd(rng, n, 0.5);
  st.R = random_psd(rng, n, 0.3);
  st.S = random_psd(rng, n, 0.2);
  MatX<double> m0 = MatX<double>(random_psd(rng, n, 0.5) + 0.5 * MatX<double>::Identity(n, n));
  MatX<double> mn = MatX<double>(random_psd(rng, n, 0.5) + 0.5 * MatX<double>::Identity(n, n));
  MatX<double> nmat = MatX<double>(random_psd(rng, n, 0.3) + 0.1 * MatX<double>::Identity(n, n));
  VecX<double> eta(n);
  for (Index i = 0; i < n; ++i) eta[i] = rng.uniform(-0.8, 0.8);
  auto coeffs = LQCoefficients<double>::uniform(horizon, std::move(st), std::move(m0),
                                                std::move(mn), std::move(nmat), std::move(eta));
  coeffs.validate();
  return coeffs;
}

}  // namespace fbsdelta::testing
