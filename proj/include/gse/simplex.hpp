#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gse::lp {

enum class Sense { less_equal, greater_equal, equal };

struct Row {
  std::vector<double> coefficients;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
  std::string label;
};

// maximize c'x subject to rows, x >= 0.
class Problem {
 public:
  explicit Problem(std::size_t num_vars) : objective_(num_vars, 0.0) {}

  std::size_t num_vars() const { return objective_.size(); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_objective(std::vector<double> c);
  void set_objective_coefficient(std::size_t var, double c) { objective_.at(var) = c; }
  std::size_t add_row(std::vector<double> coefficients, Sense sense, double rhs, std::string label = {});

 private:
  std::vector<double> objective_;
  std::vector<Row> rows_;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string_view name(Status s);

struct Options {
  // Pivot and feasibility tolerance.
  double tolerance = 1e-9;
  // Reduced-cost tolerance, relative to the largest objective coefficient.
  double optimality_tolerance = 1e-9;
  int max_iterations = 50000;
};

// Primal solution plus the dual certificate recovered from the optimal basis.
// Duals follow the max-problem convention: y >= 0 on <= rows, y <= 0 on >=
// rows, free on equalities; dual feasibility means A'y >= c.
struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  std::vector<double> duals;
  double objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;         // |c'x - b'y| / max(1, sum|c_j x_j|, sum|b_i y_i|)
  double primal_infeasibility = 0.0; // largest row violation
  double dual_infeasibility = 0.0;   // largest violation of A'y >= c or of dual signs
  int iterations = 0;
};

Result solve(const Problem& problem, const Options& options = {});

}  // namespace gse::lp
