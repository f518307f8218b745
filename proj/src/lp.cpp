#include "capnet/lp.hpp"

#include <cmath>
#include <limits>

#include "capnet/error.hpp"

namespace capnet::lp {

namespace {

constexpr double kEps = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kDegenerateRun = 50;

// Columns: structural x (n), row slacks s (m) with A x - s = 0, artificials (m).
class Tableau {
 public:
  explicit Tableau(const Problem& p) : m_(p.rows), n_(p.cols), width_(p.cols + 2 * p.rows) {
    t_.assign(m_ * width_, 0.0);
    lo_.resize(width_);
    hi_.resize(width_);
    value_.resize(width_);
    basic_row_.assign(width_, -1);
    basis_.resize(m_);
    xb_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) lo_[j] = p.col_lo[j], hi_[j] = p.col_hi[j];
    for (std::size_t i = 0; i < m_; ++i) {
      lo_[n_ + i] = p.row_lo[i], hi_[n_ + i] = p.row_hi[i];
      lo_[n_ + m_ + i] = 0.0, hi_[n_ + m_ + i] = kInf;
    }
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (lo_[j] > hi_[j]) lo_[j] = hi_[j] = std::nan("");
      value_[j] = lo_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double r = value_[n_ + i];  // s_i at its lower bound
      for (std::size_t j = 0; j < n_; ++j) r -= p.a[i * n_ + j] * value_[j];
      const double sign = r >= 0.0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * p.a[i * n_ + j];
      at(i, n_ + i) = -sign;
      at(i, n_ + m_ + i) = 1.0;
      basis_[i] = n_ + m_ + i;
      basic_row_[n_ + m_ + i] = static_cast<long>(i);
      xb_[i] = std::abs(r);
    }
  }

  bool bounds_consistent() const {
    for (std::size_t j = 0; j < n_ + m_; ++j)
      if (std::isnan(lo_[j])) return false;
    return true;
  }

  /// Runs the simplex for the given cost vector over all columns.
  void optimize(const std::vector<double>& cost, std::size_t& iterations) {
    std::size_t degenerate = 0;
    std::vector<double> d(width_);
    while (true) {
      // reduced costs
      for (std::size_t j = 0; j < width_; ++j) d[j] = cost[j];
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost[basis_[i]];
        if (cb == 0.0) continue;
        const double* row = &t_[i * width_];
        for (std::size_t j = 0; j < width_; ++j) d[j] -= cb * row[j];
      }
      const bool bland = degenerate >= kDegenerateRun;
      long enter = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < width_; ++j) {
        if (basic_row_[j] >= 0 || lo_[j] == hi_[j]) continue;
        const bool at_lo = value_[j] == lo_[j];
        const double score = at_lo ? -d[j] : d[j];
        if (score <= kEps) continue;
        if (bland) {
          enter = static_cast<long>(j);
          break;
        }
        if (score > best) best = score, enter = static_cast<long>(j);
      }
      if (enter < 0) return;
      ++iterations;
      const auto j = static_cast<std::size_t>(enter);
      const double dir = value_[j] == lo_[j] ? 1.0 : -1.0;

      double step = hi_[j] - lo_[j];
      long leave = -1;
      bool leave_to_hi = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = dir * at(i, j);
        const std::size_t b = basis_[i];
        double limit = kInf;
        bool to_hi = false;
        if (alpha > kEps)
          limit = (xb_[i] - lo_[b]) / alpha;
        else if (alpha < -kEps && hi_[b] < kInf)
          limit = (hi_[b] - xb_[i]) / -alpha, to_hi = true;
        else
          continue;
        if (limit < 0.0) limit = 0.0;
        if (limit < step - kEps ||
            (leave >= 0 && std::abs(limit - step) <= kEps && basis_[i] < basis_[static_cast<std::size_t>(leave)])) {
          step = limit;
          leave = static_cast<long>(i);
          leave_to_hi = to_hi;
        }
      }
      if (step == kInf) throw InvariantError("linear relaxation is unbounded");
      degenerate = step <= kEps ? degenerate + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) xb_[i] -= dir * step * at(i, j);
      if (leave < 0) {
        value_[j] = dir > 0 ? hi_[j] : lo_[j];
        continue;
      }
      const auto r = static_cast<std::size_t>(leave);
      const std::size_t out = basis_[r];
      value_[out] = leave_to_hi ? hi_[out] : lo_[out];
      basic_row_[out] = -1;
      const double entering_value = value_[j] + dir * step;
      pivot(r, j);
      basis_[r] = j;
      basic_row_[j] = static_cast<long>(r);
      xb_[r] = entering_value;
    }
  }

  double value(std::size_t j) const {
    return basic_row_[j] >= 0 ? xb_[static_cast<std::size_t>(basic_row_[j])] : value_[j];
  }

  void close_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = n_ + m_ + i;
      hi_[j] = 0.0;
      if (basic_row_[j] < 0) value_[j] = 0.0;
    }
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::size_t width() const { return width_; }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }

  void pivot(std::size_t r, std::size_t c) {
    double* pr = &t_[r * width_];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * width_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * pr[j];
      row[c] = 0.0;
    }
  }

  std::size_t m_, n_, width_;
  std::vector<double> t_;
  std::vector<double> lo_, hi_, value_;
  std::vector<long> basic_row_;
  std::vector<std::size_t> basis_;
  std::vector<double> xb_;
};

}  // namespace

Result solve(const Problem& p) {
  if (p.a.size() != p.rows * p.cols || p.row_lo.size() != p.rows || p.row_hi.size() != p.rows ||
      p.col_lo.size() != p.cols || p.col_hi.size() != p.cols || p.cost.size() != p.cols)
    throw InvariantError("malformed linear program");
  Result res;
  res.row_violation.assign(p.rows, 0.0);
  Tableau tab(p);
  if (!tab.bounds_consistent()) return res;

  std::vector<double> phase1(tab.width(), 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) phase1[p.cols + p.rows + i] = 1.0;
  tab.optimize(phase1, res.iterations);
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i) {
    res.row_violation[i] = tab.value(p.cols + p.rows + i);
    infeasibility += res.row_violation[i];
  }
  if (infeasibility > kFeasTol) return res;
  res.row_violation.assign(p.rows, 0.0);

  tab.close_artificials();
  std::vector<double> phase2(tab.width(), 0.0);
  for (std::size_t j = 0; j < p.cols; ++j) phase2[j] = p.cost[j];
  tab.optimize(phase2, res.iterations);
  res.status = Status::optimal;
  res.x.resize(p.cols);
  for (std::size_t j = 0; j < p.cols; ++j) {
    res.x[j] = tab.value(j);
    res.objective += p.cost[j] * res.x[j];
  }
  return res;
}

}  // namespace capnet::lp
