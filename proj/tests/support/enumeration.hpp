#pragma once

// Brute-force oracles used only by tests: all quantities are recomputed by
// enumerating full paths (leaf histories) and grouping by prefix, a different
// route than the per-level recursions in the library.

#include <vector>

#include "fbsdelta/model.hpp"
#include "fbsdelta/scenario_tree.hpp"

namespace fbsdelta::testing {

// ancestor of a leaf at the given level
template <typename Scalar>
Index leaf_ancestor(const ScenarioTree<Scalar>& tree, Index leaf, int level) {
  Index idx = leaf;
  for (int k = tree.horizon(); k > level; --k) idx = tree.parent(k, idx);
  return idx;
}

// E[v_{k+1} | F_{k-1}] by grouping full paths by their level-k prefix:
// E[X 1_A] / P(A) with A the prefix atom.
template <typename Scalar>
MatX<Scalar> enum_cond_next(const ScenarioTree<Scalar>& tree, const MatX<Scalar>& next_values,
                            int k) {
  const int N = tree.horizon();
  MatX<Scalar> num = MatX<Scalar>::Zero(next_values.rows(), tree.num_nodes(k));
  VecX<Scalar> den = VecX<Scalar>::Zero(tree.num_nodes(k));
  for (Index leaf = 0; leaf < tree.num_nodes(N); ++leaf) {
    const Index group = leaf_ancestor(tree, leaf, k);
    const Index arg = leaf_ancestor(tree, leaf, k + 1);
    const Scalar p = tree.path_probability(N, leaf);
    num.col(group) += p * next_values.col(arg);
    den[group] += p;
  }
  for (Index i = 0; i < den.size(); ++i) num.col(i) /= den[i];
  return num;
}

// E[v_{k+1} w_k | F_{k-1}] by the same full-path grouping.
template <typename Scalar>
MatX<Scalar> enum_cond_weighted(const ScenarioTree<Scalar>& tree, const MatX<Scalar>& next_values,
                                int k) {
  const int N = tree.horizon();
  MatX<Scalar> num = MatX<Scalar>::Zero(next_values.rows(), tree.num_nodes(k));
  VecX<Scalar> den = VecX<Scalar>::Zero(tree.num_nodes(k));
  for (Index leaf = 0; leaf < tree.num_nodes(N); ++leaf) {
    const Index group = leaf_ancestor(tree, leaf, k);
    const Index arg = leaf_ancestor(tree, leaf, k + 1);
    const Scalar w = tree.branch(k).value(tree.branch_index(k + 1, arg));
    const Scalar p = tree.path_probability(N, leaf);
    num.col(group) += p * w * next_values.col(arg);
    den[group] += p;
  }
  for (Index i = 0; i < den.size(); ++i) num.col(i) /= den[i];
  return num;
}

// Cost functional evaluated per full path: each leaf contributes its path
// probability times the running costs accumulated along its prefix nodes plus
// the terminal cost, with the (deterministic) initial cost added once.
template <typename Scalar>
Scalar enum_cost(const ModelSpec<Scalar>& model, const ScenarioTree<Scalar>& tree,
                 const AdaptedProcess<Scalar>& u, const AdaptedProcess<Scalar>& x,
                 const AdaptedProcess<Scalar>& y) {
  const int N = tree.horizon();
  std::vector<MatX<Scalar>> yp(static_cast<std::size_t>(N)), zp(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    yp[std::size_t(k)] = enum_cond_next(tree, y.at(k + 1), k);
    zp[std::size_t(k)] = enum_cond_weighted(tree, y.at(k + 1), k);
  }
  Scalar total = model.initial_cost(VecX<Scalar>(y.col(0, 0)));
  for (Index leaf = 0; leaf < tree.num_nodes(N); ++leaf) {
    const Scalar p = tree.path_probability(N, leaf);
    Scalar along = model.terminal_cost(leaf, VecX<Scalar>(x.col(N, leaf)));
    for (int k = 0; k < N; ++k) {
      const Index node = leaf_ancestor(tree, leaf, k);
      along += model.running_cost(k, node, VecX<Scalar>(x.col(k, node)),
                                  VecX<Scalar>(yp[std::size_t(k)].col(node)),
                                  VecX<Scalar>(zp[std::size_t(k)].col(node)),
                                  VecX<Scalar>(u.col(k, node)));
    }
    total += p * along;
  }
  return total;
}

}  // namespace fbsdelta::testing
