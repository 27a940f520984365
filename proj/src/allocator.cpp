#include "gse/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gse/error.hpp"
#include "gse/simplex.hpp"

namespace gse::allocator {

namespace {

// LP columns: P_e for every class, then S. Capacities stay in GVA and masses
// are expressed in tonnes, so kg/MVA coefficients read directly as t/GVA.
constexpr std::size_t kBundleVar = kClassCount;
constexpr std::size_t kVarCount = kClassCount + 1;
constexpr double kKgPerTonne = 1000.0;

bool active(const AllocationProblem& p, EquipmentClass e) { return p.demand_gva[index(e)] > 0.0; }

// Constraints shared by both lexicographic levels.
lp::Problem build_constraints(const AllocationProblem& p) {
  lp::Problem lp(kVarCount);
  const auto& rho = p.ratios;

  for (auto m : all_materials()) {
    std::vector<double> row(kVarCount, 0.0);
    bool used = false;
    for (auto e : all_classes()) {
      const double b = p.bom.at(m, e);
      if (b > 0.0 && active(p, e)) used = true;
      row[index(e)] = b;
    }
    if (!used) continue;
    lp.add_row(std::move(row), lp::Sense::less_equal, p.availability_kg[index(m)] / kKgPerTonne,
               "material_limit:" + std::string(name(m)));
  }

  for (auto e : all_classes()) {
    std::vector<double> row(kVarCount, 0.0);
    row[index(e)] = 1.0;
    lp.add_row(std::move(row), lp::Sense::less_equal, p.demand_gva[index(e)],
               "demand_balance:" + std::string(name(e)));
  }

  for (auto e : all_classes()) {
    if (!active(p, e)) continue;
    std::vector<double> row(kVarCount, 0.0);
    row[kBundleVar] = 1.0;
    row[index(e)] = -1.0 / rho[index(e)];
    lp.add_row(std::move(row), lp::Sense::less_equal, 0.0, "sync_bundle:" + std::string(name(e)));
  }

  const auto ref = index(p.reference);
  for (auto e : all_classes()) {
    if (e == p.reference) continue;
    std::vector<double> row(kVarCount, 0.0);
    row[index(e)] = 1.0 / rho[index(e)];
    row[ref] = -1.0 / rho[ref];
    lp.add_row(std::move(row), lp::Sense::less_equal, 0.0, "hierarchy_bound:" + std::string(name(e)));
  }
  return lp;
}

ClassArray<double> effective_weights(const AllocationProblem& p, double tie_break) {
  ClassArray<double> w = p.weights;
  const auto& order = priority_order();
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const double rank = static_cast<double>(order.size() - pos);
    w[index(order[pos])] += tie_break * rank;
  }
  return w;
}

std::string diagnostics(const lp::Result& r, int year, const char* stage) {
  std::ostringstream os;
  os << "allocation LP (" << stage << ") for year " << year << ": status=" << lp::name(r.status)
     << " gap=" << r.relative_gap << " primal_inf=" << r.primal_infeasibility
     << " dual_inf=" << r.dual_infeasibility << " iterations=" << r.iterations;
  return os.str();
}

lp::Result run(const lp::Problem& lp, const lp::Options& lp_options, double max_gap, int year, const char* stage) {
  lp::Result r = lp::solve(lp, lp_options);
  if (r.status != lp::Status::optimal) throw SolverError(diagnostics(r, year, stage));

  double cmax = 1.0;
  for (double c : lp.objective()) cmax = std::max(cmax, std::abs(c));
  double bmax = 1.0;
  for (const auto& row : lp.rows()) bmax = std::max(bmax, std::abs(row.rhs));
  if (r.relative_gap > max_gap || r.primal_infeasibility > 1e-7 * bmax ||
      r.dual_infeasibility > 1e-6 * cmax) {
    throw SolverError(diagnostics(r, year, stage) + " exceeds certification tolerances");
  }
  return r;
}

}  // namespace

double LayerWeights::of(EquipmentClass e) const {
  switch (layer_of(e)) {
    case Layer::grid:
      return grid;
    case Layer::generation:
      return generation;
    case Layer::consumption:
      return consumption;
  }
  return consumption;
}

ClassArray<double> class_weights(const LayerWeights& w) {
  ClassArray<double> out{};
  for (auto e : all_classes()) out[index(e)] = w.of(e);
  return out;
}

void AllocationProblem::validate() const {
  for (double a : availability_kg) {
    if (!std::isfinite(a) || a < 0.0) throw InputError("material availability must be finite and nonnegative");
  }
  double grid_min = INFINITY, gen_min = INFINITY, gen_max = 0.0, cons_max = 0.0;
  for (auto e : all_classes()) {
    const double d = demand_gva[index(e)];
    if (!std::isfinite(d) || d < 0.0) throw InputError("demand must be finite and nonnegative");
    const double r = ratios[index(e)];
    if (!std::isfinite(r) || r <= 0.0) throw InputError("capacity ratios must be positive");
    const double w = weights[index(e)];
    if (!std::isfinite(w) || w <= 0.0) throw InputError("priority weights must be positive");
    switch (layer_of(e)) {
      case Layer::grid:
        grid_min = std::min(grid_min, w);
        break;
      case Layer::generation:
        gen_min = std::min(gen_min, w);
        gen_max = std::max(gen_max, w);
        break;
      case Layer::consumption:
        cons_max = std::max(cons_max, w);
        break;
    }
  }
  if (!(grid_min > gen_max && gen_min > cons_max)) {
    throw InputError("priority weights must decrease strictly from grid to generation to consumption");
  }
  if (layer_of(reference) != Layer::grid) throw InputError("reference class must be grid equipment");
}

double AllocationSolution::total_produced() const {
  double t = 0.0;
  for (double v : produced_gva) t += v;
  return t;
}

double AllocationSolution::total_unmet() const {
  double t = 0.0;
  for (double v : unmet_gva) t += v;
  return t;
}

AllocationSolution solve_year(const AllocationProblem& problem, const SolveOptions& options) {
  problem.validate();
  AllocationSolution sol;
  sol.year = problem.year;

  const bool any_active = std::any_of(all_classes().begin(), all_classes().end(),
                                      [&](EquipmentClass e) { return active(problem, e); });
  if (!any_active) return sol;

  const auto weights = effective_weights(problem, options.tie_break);
  std::vector<double> weighted(kVarCount, 0.0);
  for (auto e : all_classes()) weighted[index(e)] = weights[index(e)] / problem.ratios[index(e)];

  lp::Result final_lp;
  if (options.mode == LexMode::two_phase) {
    lp::Problem level_one = build_constraints(problem);
    level_one.set_objective_coefficient(kBundleVar, 1.0);
    const lp::Result first = run(level_one, {}, options.max_duality_gap, problem.year, "bundle level");

    lp::Problem level_two = build_constraints(problem);
    const double s_star = first.x[kBundleVar];
    if (s_star > 0.0) {
      std::vector<double> hold(kVarCount, 0.0);
      hold[kBundleVar] = 1.0;
      level_two.add_row(std::move(hold), lp::Sense::greater_equal, s_star * (1.0 - options.lex_tolerance),
                        "bundle_hold");
    }
    level_two.set_objective(weighted);
    final_lp = run(level_two, {}, options.max_duality_gap, problem.year, "weighted deployment");
    sol.duality_gap = std::max(first.relative_gap, final_lp.relative_gap);
    sol.lp_iterations = first.iterations + final_lp.iterations;
  } else {
    lp::Problem composite = build_constraints(problem);
    weighted[kBundleVar] = options.big_m;
    composite.set_objective(weighted);
    lp::Options lp_options;
    // Reduced costs of the weighted term sit ~M below the largest coefficient.
    lp_options.optimality_tolerance = 1e-16;
    final_lp = run(composite, lp_options, options.max_duality_gap, problem.year, "big-M composite");
    sol.duality_gap = final_lp.relative_gap;
    sol.lp_iterations = final_lp.iterations;
  }

  double bundle = INFINITY;
  for (auto e : all_classes()) {
    const auto i = index(e);
    const double d = problem.demand_gva[i];
    const double p = std::clamp(final_lp.x[i], 0.0, d);
    sol.produced_gva[i] = p;
    sol.unmet_gva[i] = d - p;
    sol.normalized[i] = p / problem.ratios[i];
    sol.weighted_deployment += problem.weights[i] * sol.normalized[i];
    if (d > 0.0) bundle = std::min(bundle, sol.normalized[i]);
  }
  sol.bundle_level = bundle;
  sol.bundle_variable = final_lp.x[kBundleVar];
  return sol;
}

std::vector<AllocationSolution> solve_horizon(std::span<const AllocationProblem> problems,
                                              const SolveOptions& options) {
  for (std::size_t i = 1; i < problems.size(); ++i) {
    if (problems[i].year <= problems[i - 1].year) throw InputError("horizon years must ascend strictly");
  }
  std::vector<AllocationSolution> out;
  out.reserve(problems.size());
  for (const auto& p : problems) out.push_back(solve_year(p, options));
  return out;
}

MaterialArray<MaterialUsage> usage_ratios(const AllocationSolution& solution, const AllocationProblem& problem) {
  const auto consumed = bom::material_demand(solution.produced_gva, problem.bom);
  MaterialArray<MaterialUsage> out{};
  for (auto m : all_materials()) {
    auto& u = out[index(m)];
    u.material = m;
    u.consumed_kg = consumed[index(m)];
    u.available_kg = problem.availability_kg[index(m)];
    if (u.available_kg > 0.0) {
      u.ratio = u.consumed_kg / u.available_kg;
    } else {
      u.no_availability = true;
    }
    u.bottleneck = u.ratio > kBottleneckThreshold;
    u.binding = !u.no_availability && u.ratio >= 1.0 - kBindingTolerance;
  }
  return out;
}

GapReport gap_report(std::span<const AllocationSolution> solutions, const demand::DemandSchedule& schedule) {
  GapReport report;
  auto finish = [](GapRow row) {
    row.gap_ratio = row.demand_gva > 0.0 ? row.unmet_gva / row.demand_gva : 0.0;
    return row;
  };

  for (const auto& s : solutions) {
    if (s.year < schedule.first_year() || s.year > schedule.last_year()) {
      throw InputError("solution year " + std::to_string(s.year) + " missing from the demand schedule");
    }
    std::array<GapRow, 3> groups;
    for (auto g : {ReportGroup::transformer, ReportGroup::other_supply_side, ReportGroup::load_side}) {
      groups[static_cast<std::size_t>(g)].label = std::string(name(g));
      groups[static_cast<std::size_t>(g)].year = s.year;
    }
    GapRow all{"all", s.year};

    for (auto e : all_classes()) {
      const auto i = index(e);
      const double d = schedule.total(e, s.year);
      if (std::abs(s.produced_gva[i] + s.unmet_gva[i] - d) > 1e-9 * std::max(1.0, d)) {
        throw InputError("solution for " + std::string(name(e)) + " in " + std::to_string(s.year) +
                         " does not balance against the schedule");
      }
      report.classes.push_back(finish({std::string(name(e)), s.year, d, s.produced_gva[i], s.unmet_gva[i]}));
      auto& g = groups[static_cast<std::size_t>(report_group(e))];
      for (GapRow* row : {&g, &all}) {
        row->demand_gva += d;
        row->produced_gva += s.produced_gva[i];
        row->unmet_gva += s.unmet_gva[i];
      }
    }
    for (auto& g : groups) report.groups.push_back(finish(g));
    report.aggregate.push_back(finish(all));
  }
  return report;
}

nlohmann::json to_json(const AllocationProblem& p) {
  nlohmann::json j;
  j["year"] = p.year;
  j["reference"] = name(p.reference);
  for (auto m : all_materials()) j["availability_kg"][std::string(name(m))] = p.availability_kg[index(m)];
  for (auto e : all_classes()) {
    const std::string key(name(e));
    j["demand_gva"][key] = p.demand_gva[index(e)];
    j["ratios"][key] = p.ratios[index(e)];
    j["weights"][key] = p.weights[index(e)];
  }
  auto cells = nlohmann::json::array();
  for (auto m : all_materials()) {
    for (auto e : all_classes()) {
      if (p.bom.at(m, e) != 0.0) {
        cells.push_back({{"material", name(m)}, {"equipment_class", name(e)}, {"kg_per_mva", p.bom.at(m, e)}});
      }
    }
  }
  j["bom"] = std::move(cells);
  return j;
}

AllocationProblem problem_from_json(const nlohmann::json& j) {
  try {
    AllocationProblem p;
    p.year = j.at("year").get<int>();
    p.reference = parse_class(j.at("reference").get<std::string>());
    for (auto m : all_materials()) p.availability_kg[index(m)] = j.at("availability_kg").at(std::string(name(m)));
    for (auto e : all_classes()) {
      const std::string key(name(e));
      p.demand_gva[index(e)] = j.at("demand_gva").at(key);
      p.ratios[index(e)] = j.at("ratios").at(key);
      p.weights[index(e)] = j.at("weights").at(key);
    }
    for (const auto& cell : j.at("bom")) {
      p.bom.set(parse_material(cell.at("material").get<std::string>()),
                parse_class(cell.at("equipment_class").get<std::string>()), cell.at("kg_per_mva").get<double>());
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("allocation problem JSON: ") + e.what());
  }
}

}  // namespace gse::allocator
