#pragma once

#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "gse/bom.hpp"
#include "gse/demand.hpp"
#include "gse/types.hpp"

namespace gse::allocator {

// Per-layer priority weights; only their ordering grid >> generation >>
// consumption carries meaning.
struct LayerWeights {
  double grid = 1e4;
  double generation = 1e2;
  double consumption = 1.0;

  double of(EquipmentClass e) const;
};

ClassArray<double> class_weights(const LayerWeights& w);

// One year of the material-constrained deployment problem.
struct AllocationProblem {
  int year = 0;
  MaterialArray<double> availability_kg{};  // summed over supply regions
  ClassArray<double> demand_gva{};
  bom::BomMatrix bom;
  demand::RatioTable ratios = demand::default_ratios();
  ClassArray<double> weights = class_weights({});
  EquipmentClass reference = EquipmentClass::transformer;

  // Throws InputError on negative or non-finite data, nonpositive ratios, or
  // weights that do not decrease strictly from grid to consumption.
  void validate() const;
};

enum class LexMode {
  two_phase,  // maximize S, then hold S and maximize sum w_e V_e
  big_m,      // single composite objective M*S + sum w_e V_e
};

struct SolveOptions {
  LexMode mode = LexMode::two_phase;
  double big_m = 1e9;
  double lex_tolerance = 1e-8;        // relative slack on S in the second phase
  double tie_break = 1e-9;            // per-rank perturbation added to w_e
  double max_duality_gap = 1e-7;      // relative, per LP
};

struct AllocationSolution {
  int year = 0;
  ClassArray<double> produced_gva{};    // P_e
  ClassArray<double> unmet_gva{};       // U_e = D_e - P_e
  ClassArray<double> normalized{};      // V_e = P_e / rho_e
  double bundle_level = 0.0;            // S, min over active classes of the final V_e
  double bundle_variable = 0.0;         // S as the last LP left it (<= bundle_level)
  double weighted_deployment = 0.0;     // sum w_e V_e
  double duality_gap = 0.0;             // worst relative gap over the LPs solved
  int lp_iterations = 0;

  double total_produced() const;
  double total_unmet() const;
};

AllocationSolution solve_year(const AllocationProblem& problem, const SolveOptions& options = {});

// Years carry no coupling constraint, so the summed objective decomposes into
// independent per-year solves. Throws InputError unless years ascend strictly.
std::vector<AllocationSolution> solve_horizon(std::span<const AllocationProblem> problems,
                                              const SolveOptions& options = {});

inline constexpr double kBottleneckThreshold = 0.5;
inline constexpr double kBindingTolerance = 1e-6;

struct MaterialUsage {
  Material material{};
  double consumed_kg = 0.0;
  double available_kg = 0.0;
  double ratio = 0.0;
  bool no_availability = false;  // available_kg == 0; ratio reported as 0
  bool bottleneck = false;       // ratio > 0.5
  bool binding = false;          // ratio >= 1 - 1e-6
};

MaterialArray<MaterialUsage> usage_ratios(const AllocationSolution& solution, const AllocationProblem& problem);

struct GapRow {
  std::string label;
  int year = 0;
  double demand_gva = 0.0;
  double produced_gva = 0.0;
  double unmet_gva = 0.0;
  double gap_ratio = 0.0;  // unmet / demand, 0 when demand is 0
};

struct GapReport {
  std::vector<GapRow> classes;    // one per (class, year)
  std::vector<GapRow> groups;     // transformer / other_supply_side / load_side per year
  std::vector<GapRow> aggregate;  // all classes per year
};

// Throws InputError when a solution's year is missing from the schedule or its
// production and unmet demand do not add up to the scheduled requirement.
GapReport gap_report(std::span<const AllocationSolution> solutions, const demand::DemandSchedule& schedule);

nlohmann::json to_json(const AllocationProblem& problem);
AllocationProblem problem_from_json(const nlohmann::json& j);

}  // namespace gse::allocator
