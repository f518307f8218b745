#pragma once

#include <cstddef>
#include <vector>

namespace capnet::lp {

/// minimize cost.x  s.t.  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
/// All bounds must be finite. A is dense, row-major (rows x cols).
struct Problem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> row_lo, row_hi;
  std::vector<double> col_lo, col_hi;
  std::vector<double> cost;

  double& coef(std::size_t r, std::size_t c) { return a[r * cols + c]; }
};

enum class Status { optimal, infeasible };

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  /// Residual bound violation per row after phase one (zero when feasible).
  std::vector<double> row_violation;
  std::size_t iterations = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, switching to Bland's rule after a run of degenerate pivots.
Result solve(const Problem& problem);

}  // namespace capnet::lp
