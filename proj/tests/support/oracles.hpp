#pragma once

// Reference implementations used to cross-check the library. They favor the
// most direct formulation over speed.

#include "stepstream/footstep_optimizer.hpp"

#include <array>

namespace stepstream::testing {

/// Sequential scan of every grid candidate keeping the lexicographic minimum of
/// (cost, L1 offset, |yaw offset|, index). Returns the winning index and result;
/// index == grid size when nothing is feasible.
struct BruteForceResult {
  std::size_t index = 0;
  CandidateResult result;
  std::size_t evaluated = 0;
};
BruteForceResult brute_force_optimize(const SearchSpec& spec, const HeightMap& map, const FootGeometry& foot,
                                      const CostWeights& weights);

/// Least-squares plane through five points by QR of the 5 x 3 design matrix.
/// Returns (alpha, beta, gamma) and the residuals.
struct PlaneOracle {
  Eigen::Vector3d coefficients;
  std::array<double, 5> residuals{};
};
PlaneOracle plane_oracle(const std::array<Eigen::Vector3d, 5>& points);

}  // namespace stepstream::testing
