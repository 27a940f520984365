#include "gse/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gse/error.hpp"

namespace gse::lp {

void Problem::set_objective(std::vector<double> c) {
  if (c.size() != objective_.size()) throw InputError("objective length does not match variable count");
  objective_ = std::move(c);
}

std::size_t Problem::add_row(std::vector<double> coefficients, Sense sense, double rhs, std::string label) {
  if (coefficients.size() != num_vars()) throw InputError("row length does not match variable count");
  for (double a : coefficients) {
    if (!std::isfinite(a)) throw InputError("non-finite constraint coefficient");
  }
  if (!std::isfinite(rhs)) throw InputError("non-finite right-hand side");
  rows_.push_back({std::move(coefficients), sense, rhs, std::move(label)});
  return rows_.size() - 1;
}

std::string_view name(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::iteration_limit:
      return "iteration_limit";
  }
  return "?";
}

namespace {

// Dense tableau in standard form: rows with nonnegative rhs, structural
// columns, then one slack/surplus per inequality, then artificials.
class Tableau {
 public:
  Tableau(const Problem& p, double tol, double opt_tol) : tol_(tol), opt_tol_(opt_tol), m_(p.rows().size()), n_(p.num_vars()) {
    flipped_.assign(m_, false);
    std::vector<Sense> senses(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = p.rows()[i];
      senses[i] = row.sense;
      if (row.rhs < 0.0) {
        flipped_[i] = true;
        if (row.sense == Sense::less_equal) senses[i] = Sense::greater_equal;
        else if (row.sense == Sense::greater_equal) senses[i] = Sense::less_equal;
      }
    }
    std::size_t slacks = 0;
    std::size_t artificials = 0;
    for (auto s : senses) {
      if (s != Sense::equal) ++slacks;
      if (s != Sense::less_equal) ++artificials;
    }
    first_slack_ = n_;
    first_artificial_ = n_ + slacks;
    cols_ = first_artificial_ + artificials;
    t_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_ + 1));
    basis_.assign(m_, 0);
    alive_.assign(m_, true);
    slack_row_.assign(slacks, 0);

    std::size_t next_slack = first_slack_;
    std::size_t next_art = first_artificial_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = p.rows()[i];
      const double sign = flipped_[i] ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * row.coefficients[j];
      rhs(i) = sign * row.rhs;
      switch (senses[i]) {
        case Sense::less_equal:
          at(i, next_slack) = 1.0;
          slack_row_[next_slack - first_slack_] = i;
          basis_[i] = next_slack++;
          break;
        case Sense::greater_equal:
          at(i, next_slack) = -1.0;
          slack_row_[next_slack - first_slack_] = i;
          ++next_slack;
          at(i, next_art) = 1.0;
          basis_[i] = next_art++;
          break;
        case Sense::equal:
          at(i, next_art) = 1.0;
          basis_[i] = next_art++;
          break;
      }
    }
  }

  std::size_t columns() const { return cols_; }
  std::size_t structural() const { return n_; }
  bool has_artificials() const { return first_artificial_ < cols_; }
  bool is_artificial(std::size_t j) const { return j >= first_artificial_; }
  bool flipped(std::size_t i) const { return flipped_[i]; }
  bool alive(std::size_t i) const { return alive_[i]; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  std::size_t rows() const { return m_; }
  // Row owning slack column j, or rows() for any other column.
  std::size_t slack_row(std::size_t j) const {
    return j >= first_slack_ && j < first_artificial_ ? slack_row_[j - first_slack_] : m_;
  }

  double& at(std::size_t i, std::size_t j) {
    return t_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double at(std::size_t i, std::size_t j) const {
    return t_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double& rhs(std::size_t i) { return at(i, cols_); }
  double rhs(std::size_t i) const { return at(i, cols_); }

  // Column of the standard-form constraint matrix as originally built.
  void snapshot() { original_ = t_; }
  double original(std::size_t i, std::size_t j) const {
    return original_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  void pivot(std::size_t r, std::size_t c) {
    const auto ri = static_cast<Eigen::Index>(r);
    const auto ci = static_cast<Eigen::Index>(c);
    t_.row(ri) /= t_(ri, ci);
    t_(ri, ci) = 1.0;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == ri) continue;
      const double f = t_(i, ci);
      if (f != 0.0) {
        t_.row(i) -= f * t_.row(ri);
        t_(i, ci) = 0.0;
      }
    }
    basis_[r] = c;
  }

  // Bland's rule simplex on cost vector c (maximize). Returns the terminal status.
  Status optimize(const std::vector<double>& c, bool allow_artificial, int& iterations, int max_iterations) {
    const double cscale = std::max(1.0, max_abs(c));
    while (true) {
      if (iterations >= max_iterations) return Status::iteration_limit;
      std::size_t entering = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (is_basic(j)) continue;
        double reduced = -c[j];
        for (std::size_t i = 0; i < m_; ++i) {
          if (alive_[i]) reduced += c[basis_[i]] * at(i, j);
        }
        if (reduced < -opt_tol_ * cscale) {
          entering = j;
          break;
        }
      }
      if (entering == cols_) return Status::optimal;

      std::size_t leaving = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (!alive_[i]) continue;
        const double a = at(i, entering);
        if (a <= tol_) continue;
        const double ratio = std::max(0.0, rhs(i)) / a;
        if (leaving == m_) {
          best = ratio;
          leaving = i;
          continue;
        }
        const double slack = 1e-12 * std::max(1.0, best);
        if (ratio < best - slack || (ratio <= best + slack && basis_[i] < basis_[leaving])) {
          best = ratio;
          leaving = i;
        }
      }
      if (leaving == m_) return Status::unbounded;
      pivot(leaving, entering);
      ++iterations;
    }
  }

  // After phase one: pivot zero-level artificials out of the basis, or retire
  // their rows when no structural or slack column can replace them.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!alive_[i] || !is_artificial(basis_[i])) continue;
      std::size_t best = cols_;
      double best_abs = tol_;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (std::abs(at(i, j)) > best_abs) {
          best_abs = std::abs(at(i, j));
          best = j;
        }
      }
      if (best == cols_) {
        alive_[i] = false;
      } else {
        pivot(i, best);
      }
    }
  }

 private:
  static double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i) {
      if (alive_[i] && basis_[i] == j) return true;
    }
    return false;
  }

  double tol_;
  double opt_tol_;
  std::size_t m_;
  std::size_t n_;
  std::size_t cols_ = 0;
  std::size_t first_slack_ = 0;
  std::size_t first_artificial_ = 0;
  Eigen::MatrixXd t_;
  Eigen::MatrixXd original_;
  std::vector<std::size_t> basis_;
  std::vector<bool> flipped_;
  std::vector<bool> alive_;
  std::vector<std::size_t> slack_row_;
};

// The tableau rhs drifts after many pivots; re-solve B x_B = b from the
// original rows so x and the duals come from the same factorization.
void refine_primal(const Problem& p, const Tableau& tab, Result& r) {
  const std::size_t n = p.num_vars();
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    if (tab.alive(i)) live.push_back(i);
  }
  if (live.empty()) return;
  const auto k = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd basis(k, k);
  Eigen::VectorXd b(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const std::size_t row = live[static_cast<std::size_t>(a)];
    b[a] = tab.original(row, tab.columns());
    for (Eigen::Index c = 0; c < k; ++c) basis(a, c) = tab.original(row, tab.basis()[live[static_cast<std::size_t>(c)]]);
  }
  const auto lu = basis.fullPivLu();
  if (!lu.isInvertible()) return;
  Eigen::VectorXd xb = lu.solve(b);
  xb += lu.solve(b - basis * xb);
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::size_t col = tab.basis()[live[static_cast<std::size_t>(c)]];
    if (col < n) r.x[col] = std::max(0.0, xb[c]);
  }
}

void certify(const Problem& p, const Tableau& tab, Result& r) {
  const std::size_t m = p.rows().size();
  const std::size_t n = p.num_vars();

  // Primal objective and feasibility from the original rows.
  r.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) r.objective += p.objective()[j] * r.x[j];
  r.primal_infeasibility = 0.0;
  for (std::size_t j = 0; j < n; ++j) r.primal_infeasibility = std::max(r.primal_infeasibility, -r.x[j]);
  for (const auto& row : p.rows()) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += row.coefficients[j] * r.x[j];
    double v = 0.0;
    if (row.sense == Sense::less_equal) v = lhs - row.rhs;
    else if (row.sense == Sense::greater_equal) v = row.rhs - lhs;
    else v = std::abs(lhs - row.rhs);
    r.primal_infeasibility = std::max(r.primal_infeasibility, v);
  }

  // Duals: solve B'y = c_B over the live rows of the standard-form matrix.
  // A basic slack pins its row's dual to exactly zero; dropping those rows
  // keeps LU roundoff off rows with large right-hand sides.
  r.duals.assign(m, 0.0);
  std::vector<bool> pinned(m, false);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (!tab.alive(i)) continue;
    const std::size_t col = tab.basis()[i];
    const std::size_t owner = tab.slack_row(col);
    if (owner < m) pinned[owner] = true;
    else cols.push_back(col);
  }
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.alive(i) && !pinned[i]) live.push_back(i);
  }
  if (!live.empty() && live.size() == cols.size()) {
    const auto k = static_cast<Eigen::Index>(live.size());
    Eigen::MatrixXd basis_t(k, k);
    Eigen::VectorXd c_b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const std::size_t col = cols[static_cast<std::size_t>(a)];
      c_b[a] = col < n ? p.objective()[col] : 0.0;
      for (Eigen::Index b = 0; b < k; ++b) basis_t(a, b) = tab.original(live[static_cast<std::size_t>(b)], col);
    }
    const auto lu = basis_t.fullPivLu();
    Eigen::VectorXd y = lu.solve(c_b);
    y += lu.solve(c_b - basis_t * y);
    for (Eigen::Index b = 0; b < k; ++b) {
      const std::size_t i = live[static_cast<std::size_t>(b)];
      r.duals[i] = tab.flipped(i) ? -y[b] : y[b];
    }
  }

  r.dual_objective = 0.0;
  r.dual_infeasibility = 0.0;
  double dual_scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = p.rows()[i];
    r.dual_objective += row.rhs * r.duals[i];
    dual_scale += std::abs(row.rhs * r.duals[i]);
    if (row.sense == Sense::less_equal) r.dual_infeasibility = std::max(r.dual_infeasibility, -r.duals[i]);
    if (row.sense == Sense::greater_equal) r.dual_infeasibility = std::max(r.dual_infeasibility, r.duals[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < m; ++i) aty += p.rows()[i].coefficients[j] * r.duals[i];
    r.dual_infeasibility = std::max(r.dual_infeasibility, p.objective()[j] - aty);
  }
  // Scale by the largest term magnitude: with an optimum near zero the dual sum
  // can cancel huge multipliers and an absolute gap would only measure roundoff.
  double primal_scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) primal_scale += std::abs(p.objective()[j] * r.x[j]);
  r.relative_gap = std::abs(r.objective - r.dual_objective) / std::max({1.0, primal_scale, dual_scale});
}

}  // namespace

Result solve(const Problem& problem, const Options& options) {
  Result result;
  Tableau tab(problem, options.tolerance, options.optimality_tolerance);
  tab.snapshot();
  int iterations = 0;

  if (tab.has_artificials()) {
    std::vector<double> phase_one(tab.columns(), 0.0);
    for (std::size_t j = 0; j < tab.columns(); ++j) {
      if (tab.is_artificial(j)) phase_one[j] = -1.0;
    }
    const Status s = tab.optimize(phase_one, true, iterations, options.max_iterations);
    if (s == Status::iteration_limit) {
      result.status = s;
      result.iterations = iterations;
      return result;
    }
    double infeasibility = 0.0;
    double scale = 1.0;
    for (const auto& row : problem.rows()) scale = std::max(scale, std::abs(row.rhs));
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      if (tab.is_artificial(tab.basis()[i])) infeasibility += std::max(0.0, tab.rhs(i));
    }
    if (infeasibility > options.tolerance * scale * 10.0) {
      result.status = Status::infeasible;
      result.iterations = iterations;
      return result;
    }
    tab.expel_artificials();
  }

  std::vector<double> cost(tab.columns(), 0.0);
  for (std::size_t j = 0; j < problem.num_vars(); ++j) cost[j] = problem.objective()[j];
  result.status = tab.optimize(cost, false, iterations, options.max_iterations);
  result.iterations = iterations;
  if (result.status != Status::optimal) return result;

  result.x.assign(problem.num_vars(), 0.0);
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    if (tab.alive(i) && tab.basis()[i] < problem.num_vars()) result.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
  }
  refine_primal(problem, tab, result);
  certify(problem, tab, result);
  return result;
}

}  // namespace gse::lp
