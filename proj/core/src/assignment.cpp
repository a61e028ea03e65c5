#include "cutofflab/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace cutofflab::detail {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double& total) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n == 0)
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based arrays with a virtual column 0; p[j] is the row matched to
  // column j, u/v are the dual potentials.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    // Augment along the recorded alternating path.
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (p[j] == 0) throw std::logic_error("solve_assignment: incomplete matching");
    row_to_col[p[j] - 1] = j - 1;
    total += cost(p[j] - 1, j - 1);
  }
  return row_to_col;
}

}  // namespace cutofflab::detail
