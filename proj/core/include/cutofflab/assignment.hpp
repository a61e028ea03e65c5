#pragma once

#include <vector>

#include <Eigen/Core>

namespace cutofflab::detail {

// Exact minimum-cost perfect assignment on a square cost matrix by the
// shortest-augmenting-path method with dual potentials, O(n³).  Returns the
// column assigned to each row; total receives the optimal cost.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double& total);

}  // namespace cutofflab::detail
