#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gse/allocator.hpp"
#include "gse/bom.hpp"
#include "gse/demand.hpp"
#include "gse/mrsut.hpp"
#include "gse/survival.hpp"
#include "gse/types.hpp"

namespace gse::scenario {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

struct TradeDisruption {
  bool enabled = false;
  std::set<std::string> restricted_regions;
  double cut = 0.7;
};

struct MrsutInputs {
  std::filesystem::path axes;
  std::filesystem::path use;
  std::filesystem::path supply;
  std::filesystem::path concordance;
  std::filesystem::path mass_factors;
  std::filesystem::path final_demand;   // year,product,value with region/product labels
  std::vector<std::string> parent_products;
};

// Parsed scenario config. Paths are resolved against the config's directory.
struct ScenarioConfig {
  std::string name;
  int first_year = 2025;
  int last_year = 2030;
  double demand_growth_rate = 0.0;
  survival::LifetimeCase lifetime_case = survival::LifetimeCase::optimistic;
  bool dtr_enabled = false;
  TradeDisruption trade;
  std::string datacenter_case;
  std::string ev_case;

  std::optional<std::filesystem::path> lifetimes;
  std::optional<std::filesystem::path> bom;
  std::optional<std::filesystem::path> ratios;
  std::filesystem::path history;
  std::filesystem::path trajectories;
  std::filesystem::path availability;
  MrsutInputs mrsut;

  double phi = mrsut::kDefaultAllocationFactor;
  mrsut::NeumannOptions neumann{200, 1e-9, false};
  allocator::LayerWeights weights;
  allocator::SolveOptions solver;

  std::filesystem::path source;  // config file, empty when built in memory
  nlohmann::json raw;            // the document as read
};

// Stage timing lines on stderr; off by default.
void set_verbose(bool on);

// Throws ConfigError on unknown keys, wrong types, or out-of-range values.
ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ScenarioConfig load_config(const std::filesystem::path& path);

// Capacity ratios CSV `equipment_class,ratio`; classes not listed keep the default.
demand::RatioTable read_ratios_csv(const std::filesystem::path& path);

// Global availability CSV `material,year,available_kg`.
std::map<int, MaterialArray<double>> read_availability_csv(const std::filesystem::path& path);

// Regional sourcing of the GSE supply chain: traced over the observed
// final-demand years and linearly extrapolated to each target year.
struct SourcingTrace {
  mrsut::LayeredRequirements layers;
  std::vector<mrsut::MaterialSourcing> observed;
};

SourcingTrace trace_sourcing(const MrsutInputs& inputs, double phi, const mrsut::NeumannOptions& neumann);

struct ScenarioResult {
  ScenarioConfig config;
  demand::DemandSchedule schedule;
  std::vector<allocator::AllocationProblem> problems;
  std::vector<allocator::AllocationSolution> solutions;
  std::vector<MaterialArray<allocator::MaterialUsage>> usage;
  std::vector<mrsut::MaterialSourcing> sourcing;  // per target year, availability split by region
  allocator::GapReport gaps;
  std::map<std::string, std::filesystem::path> inputs;  // role -> file read

  // Parameters actually used, after file overrides.
  survival::LifetimeTable lifetimes{};
  demand::RatioTable ratios{};
  bom::BomMatrix bom;
  int neumann_layers = 0;
  double spectral_radius = 0.0;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

// Per-year aggregate metrics, the unit compared across scenarios.
struct YearMetrics {
  int year = 0;
  double demand_gva = 0.0;
  double produced_gva = 0.0;
  double unmet_gva = 0.0;
  double gap_ratio = 0.0;
  double transformer_unmet_gva = 0.0;
  double other_unmet_gva = 0.0;  // every class except the transformer
  double bundle_level = 0.0;
  MaterialArray<double> usage_ratio{};
};

struct Summary {
  std::string scenario;
  std::vector<std::string> classes;
  std::vector<YearMetrics> years;
};

Summary summarize(const ScenarioResult& result);
nlohmann::json to_json(const Summary& s);
Summary summary_from_json(const nlohmann::json& j);

std::string sha256_file(const std::filesystem::path& path);

// Writes demand_schedule.csv, gap_report.csv, gap_groups.csv, usage_ratios.csv,
// material_balance.csv, sourcing_shares.csv, summary.json and manifest.json
// into out_dir. Refuses to
// overwrite another scenario's outputs. Returns the manifest.
nlohmann::json write_outputs(const ScenarioResult& result, const std::filesystem::path& out_dir);

// Re-resolves the config embedded in a manifest and checks that the inputs
// still hash to the recorded digests (DataError otherwise).
ScenarioConfig config_from_manifest(const std::filesystem::path& manifest_path);

void write_allocation_problems(const ScenarioResult& result, const std::filesystem::path& out_dir);

struct DeltaRow {
  int year = 0;
  std::string metric;
  double reference = 0.0;
  double variant = 0.0;
  double delta = 0.0;
};

// Changes of the variant relative to the reference: total unmet (GVA and
// gap-ratio percentage points), transformer unmet, other-GSE unmet and each
// material's usage ratio. Throws InputError when years or classes differ.
std::vector<DeltaRow> compare(const Summary& reference, const Summary& variant);
void write_delta_csv(std::ostream& out, const std::vector<DeltaRow>& rows);

// Output directory holding manifest.json + summary.json, or the manifest itself.
Summary load_summary(const std::filesystem::path& dir_or_manifest);

}  // namespace gse::scenario
