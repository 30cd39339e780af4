#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbsdelta/errors.hpp"
#include "fbsdelta/types.hpp"

namespace fbsdelta {

// One noise step: the finite support of a unit-variance martingale difference.
// Invariants: probabilities strictly positive and summing to 1, weighted mean
// 0 and weighted second moment 1 (all within kMomentTol).
template <typename Scalar>
struct BranchSpec {
  struct Point {
    Scalar value;
    Scalar probability;
  };
  std::vector<Point> points;

  Index size() const { return static_cast<Index>(points.size()); }
  Scalar value(Index i) const { return points[static_cast<std::size_t>(i)].value; }
  Scalar probability(Index i) const { return points[static_cast<std::size_t>(i)].probability; }

  static BranchSpec rademacher() {
    return BranchSpec{{{Scalar(1), Scalar(0.5)}, {Scalar(-1), Scalar(0.5)}}};
  }

  // Two-point support with mean 0 and variance 1 for any up-probability p.
  static BranchSpec two_point(Scalar p_up) {
    using std::sqrt;
    const Scalar up = sqrt((Scalar(1) - p_up) / p_up);
    const Scalar down = -sqrt(p_up / (Scalar(1) - p_up));
    return BranchSpec{{{up, p_up}, {down, Scalar(1) - p_up}}};
  }

  // Symmetric three-point support {+a, 0, -a} with tail probability q each.
  static BranchSpec three_point(Scalar q = Scalar(1) / Scalar(6)) {
    using std::sqrt;
    const Scalar a = Scalar(1) / sqrt(Scalar(2) * q);
    return BranchSpec{{{a, q}, {Scalar(0), Scalar(1) - Scalar(2) * q}, {-a, q}}};
  }

  void validate(int level = -1) const {
    if (points.empty()) throw BadProbability("branch spec has no points", level);
    if (points.size() > 9)
      throw BadProbability("branch specs support at most 9 points", level);
    Scalar psum = 0, mean = 0, second = 0;
    for (const Point& pt : points) {
      if (!(pt.probability > Scalar(0)))
        throw BadProbability("branch probability must be strictly positive", level);
      psum += pt.probability;
      mean += pt.probability * pt.value;
      second += pt.probability * pt.value * pt.value;
    }
    using std::abs;
    if (abs(psum - Scalar(1)) > Scalar(kMomentTol))
      throw BadProbability("branch probabilities do not sum to 1", level);
    if (abs(mean) > Scalar(kMomentTol))
      throw MomentViolation("branch mean is not 0 (martingale difference violated)", level);
    if (abs(second - Scalar(1)) > Scalar(kMomentTol))
      throw MomentViolation("branch second moment is not 1 (unit conditional variance violated)",
                            level);
  }
};

// Finite-support scenario tree over the horizon N. Level k holds one node per
// noise history (w_0 .. w_{k-1}); level 0 is the single root (the trivial
// sigma-algebra). All nodes of level k branch with the same spec, so the atoms
// of F_{k-1} are exactly the level-k nodes. Node order within a level is
// lexicographic in the history string, which equals the construction order
// child = parent * branch_count + branch. Immutable after construction.
template <typename Scalar>
class ScenarioTree {
 public:
  ScenarioTree(int horizon, std::vector<BranchSpec<Scalar>> steps) : steps_(std::move(steps)) {
    if (horizon < 1) throw BadProbability("horizon must be >= 1");
    if (static_cast<int>(steps_.size()) != horizon)
      throw LevelMismatch("expected one branch spec per step");
    N_ = horizon;
    for (int k = 0; k < N_; ++k) steps_[static_cast<std::size_t>(k)].validate(k);

    counts_.resize(static_cast<std::size_t>(N_) + 1);
    counts_[0] = 1;
    for (int k = 0; k < N_; ++k)
      counts_[static_cast<std::size_t>(k) + 1] =
          counts_[static_cast<std::size_t>(k)] * branch_count(k);

    probs_.resize(static_cast<std::size_t>(N_) + 1);
    probs_[0] = {Scalar(1)};
    for (int k = 0; k < N_; ++k) {
      const auto& spec = steps_[static_cast<std::size_t>(k)];
      const auto& prev = probs_[static_cast<std::size_t>(k)];
      std::vector<Scalar> cur(static_cast<std::size_t>(counts_[static_cast<std::size_t>(k) + 1]));
      for (Index i = 0; i < num_nodes(k); ++i)
        for (Index b = 0; b < spec.size(); ++b)
          cur[static_cast<std::size_t>(child(k, i, b))] =
              prev[static_cast<std::size_t>(i)] * spec.probability(b);
      probs_[static_cast<std::size_t>(k) + 1] = std::move(cur);
    }
    for (int level = 0; level <= N_; ++level) {
      Scalar s = 0;
      for (Scalar p : probs_[static_cast<std::size_t>(level)]) s += p;
      using std::abs;
      if (abs(s - Scalar(1)) > Scalar(kMomentTol))
        throw BadProbability("level path probabilities do not sum to 1", level);
    }
  }

  int horizon() const { return N_; }

  Index num_nodes(int level) const { return counts_[static_cast<std::size_t>(level)]; }

  Index total_nodes() const {
    Index t = 0;
    for (Index c : counts_) t += c;
    return t;
  }

  const std::vector<Index>& level_counts() const { return counts_; }

  const BranchSpec<Scalar>& branch(int step) const {
    return steps_[static_cast<std::size_t>(step)];
  }

  Index branch_count(int step) const { return branch(step).size(); }

  // child of level-`level` node `node` along branch `b`, at level+1
  Index child(int level, Index node, Index b) const { return node * branch_count(level) + b; }

  Index parent(int level, Index node) const { return node / branch_count(level - 1); }

  // which branch of the parent led to this level-`level` node
  Index branch_index(int level, Index node) const { return node % branch_count(level - 1); }

  Scalar path_probability(int level, Index node) const {
    return probs_[static_cast<std::size_t>(level)][static_cast<std::size_t>(node)];
  }

  // canonical history string of branch indices; the root has an empty history
  std::string history(int level, Index node) const {
    std::string h(static_cast<std::size_t>(level), '0');
    Index idx = node;
    for (int k = level; k-- > 0;) {
      const Index bc = branch_count(k);
      h[static_cast<std::size_t>(k)] = static_cast<char>('0' + idx % bc);
      idx /= bc;
    }
    return h;
  }

  std::pair<int, Index> node_at(std::string_view history_digits) const {
    const int level = static_cast<int>(history_digits.size());
    if (level > N_) throw LevelMismatch("history longer than horizon");
    Index idx = 0;
    for (int k = 0; k < level; ++k) {
      const Index b = history_digits[static_cast<std::size_t>(k)] - '0';
      if (b < 0 || b >= branch_count(k)) throw LevelMismatch("history digit out of range");
      idx = idx * branch_count(k) + b;
    }
    return {level, idx};
  }

 private:
  int N_ = 0;
  std::vector<BranchSpec<Scalar>> steps_;
  std::vector<Index> counts_;
  std::vector<std::vector<Scalar>> probs_;
};

template <typename Scalar>
ScenarioTree<Scalar> rademacher_tree(int horizon) {
  return ScenarioTree<Scalar>(
      horizon, std::vector<BranchSpec<Scalar>>(static_cast<std::size_t>(horizon),
                                               BranchSpec<Scalar>::rademacher()));
}

// Time-indexed node values with the fixed measurability convention: the
// time-k value of a process is F_{k-1}-measurable and lives on level-k nodes.
// Level k stores a dim x num_nodes(k) matrix (one column per node); a level
// without values holds an empty matrix.
template <typename Scalar>
class AdaptedProcess {
 public:
  AdaptedProcess() = default;

  AdaptedProcess(Index dim, std::vector<MatX<Scalar>> levels)
      : dim_(dim), levels_(std::move(levels)) {
    for (const auto& lv : levels_)
      if (lv.size() != 0 && lv.rows() != dim_)
        throw ShapeMismatch("process level dimension differs from declared dimension");
  }

  static AdaptedProcess zeros(const ScenarioTree<Scalar>& tree, Index dim, int last_level) {
    std::vector<MatX<Scalar>> lv(static_cast<std::size_t>(last_level) + 1);
    for (int k = 0; k <= last_level; ++k)
      lv[static_cast<std::size_t>(k)] = MatX<Scalar>::Zero(dim, tree.num_nodes(k));
    return AdaptedProcess(dim, std::move(lv));
  }

  static AdaptedProcess constant(const ScenarioTree<Scalar>& tree, int last_level,
                                 const VecX<Scalar>& value) {
    AdaptedProcess p = zeros(tree, value.size(), last_level);
    for (int k = 0; k <= last_level; ++k) p.at(k).colwise() = value;
    return p;
  }

  Index dim() const { return dim_; }

  int num_levels() const { return static_cast<int>(levels_.size()); }

  bool has_level(int level) const {
    return level >= 0 && level < num_levels() &&
           levels_[static_cast<std::size_t>(level)].size() != 0;
  }

  MatX<Scalar>& at(int level) {
    if (level < 0 || level >= num_levels())
      throw LevelMismatch("process has no such level");
    return levels_[static_cast<std::size_t>(level)];
  }
  const MatX<Scalar>& at(int level) const {
    if (level < 0 || level >= num_levels())
      throw LevelMismatch("process has no such level");
    return levels_[static_cast<std::size_t>(level)];
  }

  auto col(int level, Index node) { return at(level).col(node); }
  auto col(int level, Index node) const { return at(level).col(node); }

 private:
  Index dim_ = 0;
  std::vector<MatX<Scalar>> levels_;
};

namespace detail {

template <typename Scalar>
void require_level(const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& proc,
                   int level, const char* what) {
  if (!proc.has_level(level)) throw LevelMismatch(std::string(what) + ": missing level values");
  if (proc.at(level).cols() != tree.num_nodes(level))
    throw LevelMismatch(std::string(what) + ": node count differs from tree level");
}

}  // namespace detail

// E[v_{k+1} | F_{k-1}] on the slice of level-(k+1) values: per level-k node,
// the branch-probability weighted average of its children.
template <typename Scalar>
MatX<Scalar> cond_expect_next(const ScenarioTree<Scalar>& tree, const MatX<Scalar>& next_values,
                              int k) {
  if (k < 0 || k > tree.horizon() - 1) throw LevelMismatch("time index outside 0..N-1");
  if (next_values.cols() != tree.num_nodes(k + 1))
    throw LevelMismatch("value slice does not match level k+1 node count");
  const auto& spec = tree.branch(k);
  MatX<Scalar> out = MatX<Scalar>::Zero(next_values.rows(), tree.num_nodes(k));
  for (Index i = 0; i < tree.num_nodes(k); ++i)
    for (Index b = 0; b < spec.size(); ++b)
      out.col(i) += spec.probability(b) * next_values.col(tree.child(k, i, b));
  return out;
}

// E[v_{k+1} w_k | F_{k-1}]: as above but weighted by the branch noise value.
template <typename Scalar>
MatX<Scalar> cond_expect_weighted(const ScenarioTree<Scalar>& tree,
                                  const MatX<Scalar>& next_values, int k) {
  if (k < 0 || k > tree.horizon() - 1) throw LevelMismatch("time index outside 0..N-1");
  if (next_values.cols() != tree.num_nodes(k + 1))
    throw LevelMismatch("value slice does not match level k+1 node count");
  const auto& spec = tree.branch(k);
  MatX<Scalar> out = MatX<Scalar>::Zero(next_values.rows(), tree.num_nodes(k));
  for (Index i = 0; i < tree.num_nodes(k); ++i)
    for (Index b = 0; b < spec.size(); ++b)
      out.col(i) += spec.probability(b) * spec.value(b) * next_values.col(tree.child(k, i, b));
  return out;
}

template <typename Scalar>
MatX<Scalar> cond_expect_next(const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& proc,
                              int k) {
  detail::require_level(tree, proc, k + 1, "cond_expect_next");
  return cond_expect_next(tree, proc.at(k + 1), k);
}

template <typename Scalar>
MatX<Scalar> cond_expect_weighted(const ScenarioTree<Scalar>& tree,
                                  const AdaptedProcess<Scalar>& proc, int k) {
  detail::require_level(tree, proc, k + 1, "cond_expect_weighted");
  return cond_expect_weighted(tree, proc.at(k + 1), k);
}

// Unconditional expectation of a level-k slice: path-probability weighted sum.
template <typename Scalar>
VecX<Scalar> total_expectation(const ScenarioTree<Scalar>& tree, const MatX<Scalar>& values,
                               int k) {
  if (values.cols() != tree.num_nodes(k))
    throw LevelMismatch("value slice does not match level node count");
  VecX<Scalar> out = VecX<Scalar>::Zero(values.rows());
  for (Index i = 0; i < tree.num_nodes(k); ++i)
    out += tree.path_probability(k, i) * values.col(i);
  return out;
}

template <typename Scalar>
VecX<Scalar> total_expectation(const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& proc,
                               int k) {
  detail::require_level(tree, proc, k, "total_expectation");
  return total_expectation(tree, proc.at(k), k);
}

// Sup norm over all stored levels.
template <typename Scalar>
Scalar sup_norm(const AdaptedProcess<Scalar>& proc) {
  Scalar m = 0;
  for (int k = 0; k < proc.num_levels(); ++k)
    if (proc.has_level(k)) m = std::max(m, proc.at(k).cwiseAbs().maxCoeff());
  return m;
}

template <typename Scalar>
Scalar sup_distance(const AdaptedProcess<Scalar>& a, const AdaptedProcess<Scalar>& b) {
  if (a.num_levels() != b.num_levels() || a.dim() != b.dim())
    throw ShapeMismatch("sup_distance: processes have different shapes");
  Scalar m = 0;
  for (int k = 0; k < a.num_levels(); ++k) {
    if (a.has_level(k) != b.has_level(k))
      throw ShapeMismatch("sup_distance: processes have different levels");
    if (a.has_level(k)) m = std::max(m, (a.at(k) - b.at(k)).cwiseAbs().maxCoeff());
  }
  return m;
}

// Sum over levels first..last of E |a_k - b_k|^2 (squared Euclidean norm).
template <typename Scalar>
Scalar expected_square_distance(const ScenarioTree<Scalar>& tree, const AdaptedProcess<Scalar>& a,
                                const AdaptedProcess<Scalar>& b, int first_level, int last_level) {
  Scalar total = 0;
  for (int k = first_level; k <= last_level; ++k) {
    MatX<Scalar> d = (a.at(k) - b.at(k)).colwise().squaredNorm();
    total += total_expectation(tree, d, k)[0];
  }
  return total;
}

}  // namespace fbsdelta
