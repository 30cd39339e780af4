#pragma once

#include <Eigen/Dense>

namespace fbsdelta {

using Index = Eigen::Index;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Absolute tolerance for probability / moment bookkeeping on trees.
inline constexpr double kMomentTol = 1e-12;

// Pivot magnitude below which a direct elimination is declared singular.
inline constexpr double kSingularPivot = 1e-12;

}  // namespace fbsdelta
