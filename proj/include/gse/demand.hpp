#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gse/survival.hpp"
#include "gse/types.hpp"

namespace gse::demand {

// GSE capacity required per unit of driver capacity (generation or load).
using RatioTable = ClassArray<double>;

RatioTable default_ratios();

// Linear ramp from 0 at start_year to ref_load at ref_year. Throws ConfigError
// when ref_year <= start_year or ref_load <= 0.
YearSeries reconstruct_datacenter_load(double ref_load, int ref_year = 2025, int start_year = 2006);

// Geometric stock path s(y) = s0 * g^(y - start_year) anchored so that
// s(anchor_year) == observed. When initial_value is absent s0 defaults to
// initial_fraction * observed.
struct EvCalibration {
  int start_year = 2011;
  int anchor_year = 2024;
  double initial_fraction = 1e-3;
  std::optional<double> initial_value;
};

YearSeries reconstruct_ev_stock(double observed, const EvCalibration& calibration = {});

// Growth factor g of the EV stock path for a given calibration.
double ev_growth_factor(double observed, const EvCalibration& calibration = {});

// Year-on-year additions of a level series; the first year's level counts as
// its own addition. Throws InputError when the level ever decreases.
YearSeries increments(const YearSeries& level);

struct ScenarioSpec {
  std::string name;
  // Compound annual growth of generation-driven additions from base_year.
  double demand_growth_rate = 0.0;
  int base_year = 2024;
  int first_year = 2025;
  int last_year = 2030;

  // Driver capacity added in base_year (GW) for generation-linked classes;
  // projected additions are base * (1 + rate)^(year - base_year).
  std::map<EquipmentClass, double> generation_base_gw;

  // Full data center IT-load level series (GW): reconstructed history plus the
  // scenario trajectory through last_year.
  YearSeries datacenter_load_gw;
  // Full EV charging capacity level series (GW).
  YearSeries ev_stock_gw;

  survival::LifetimeCase lifetime_case = survival::LifetimeCase::optimistic;
  bool dtr_enabled = false;
  bool trade_disruption_enabled = false;

  // Throws ConfigError when fields are out of range.
  void validate() const;
};

// Fraction of required transformer capacity removed by dynamic rating.
inline constexpr double kDtrReduction = 0.10;

struct DemandCell {
  double new_gva = 0.0;
  double replacement_gva = 0.0;
  double total() const { return new_gva + replacement_gva; }
};

class DemandSchedule {
 public:
  DemandSchedule() = default;
  DemandSchedule(int first_year, int last_year);

  int first_year() const { return first_year_; }
  int last_year() const { return last_year_; }
  std::vector<int> years() const;

  const DemandCell& cell(EquipmentClass e, int year) const;
  DemandCell& cell(EquipmentClass e, int year);
  double total(EquipmentClass e, int year) const { return cell(e, year).total(); }

  // Required capacity per class in one year.
  ClassArray<double> totals(int year) const;

 private:
  std::size_t offset(int year) const;

  int first_year_ = 0;
  int last_year_ = -1;
  ClassArray<std::vector<DemandCell>> cells_;
};

// Historical net GSE additions (GVA) per generation-side class. Load-side
// classes are derived from the scenario's load series instead.
using History = std::map<EquipmentClass, YearSeries>;

// Classes whose net additions come from the generation history file.
bool uses_generation_history(EquipmentClass e);

// Net GSE additions per class over the full record: history before
// first_year, ratio-mapped driver additions from first_year on.
ClassArray<YearSeries> net_additions(const ScenarioSpec& scenario, const History& history,
                                     const RatioTable& ratios);

DemandSchedule project_demand(const ScenarioSpec& scenario, const History& history,
                              const survival::LifetimeTable& lifetimes,
                              const RatioTable& ratios = default_ratios());

// CSV `class,year,new_gva,replacement_gva,total_gva`, 3 decimals.
void write_schedule_csv(std::ostream& out, const DemandSchedule& schedule);

}  // namespace gse::demand
