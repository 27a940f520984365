#include "gse/demand.hpp"

#include <cmath>
#include <string>

#include "gse/csv.hpp"
#include "gse/error.hpp"

namespace gse::demand {

RatioTable default_ratios() {
  using E = EquipmentClass;
  RatioTable r{};
  // Step-up 1.1, transmission 2.25, distribution 2.32 combined into one bulk category.
  r[index(E::transformer)] = 1.1 + 2.25 + 2.32;
  r[index(E::spv_inverter)] = 1.34;
  r[index(E::dfig_converter)] = 0.3;
  r[index(E::pmsg_converter)] = 1.0;
  r[index(E::battery_pcs)] = 1.0;
  r[index(E::dc_transformer)] = 1.25;
  r[index(E::dc_ups)] = 1.37;
  r[index(E::ev_charger_pcs)] = 1.0;
  return r;
}

YearSeries reconstruct_datacenter_load(double ref_load, int ref_year, int start_year) {
  if (ref_year <= start_year) throw ConfigError("data center reference year must follow the start year");
  if (!(ref_load > 0.0) || !std::isfinite(ref_load)) {
    throw ConfigError("data center reference load must be positive");
  }
  const double slope = ref_load / (ref_year - start_year);
  std::vector<double> values;
  for (int y = start_year; y <= ref_year; ++y) values.push_back(slope * (y - start_year));
  values.back() = ref_load;
  return YearSeries(start_year, std::move(values));
}

double ev_growth_factor(double observed, const EvCalibration& c) {
  if (!(observed > 0.0) || !std::isfinite(observed)) throw ConfigError("EV anchor stock must be positive");
  if (c.anchor_year <= c.start_year) throw ConfigError("EV anchor year must follow the start year");
  const double s0 = c.initial_value ? *c.initial_value : c.initial_fraction * observed;
  if (!(s0 > 0.0) || s0 > observed) throw ConfigError("EV initial stock must lie in (0, anchor]");
  return std::pow(observed / s0, 1.0 / (c.anchor_year - c.start_year));
}

YearSeries reconstruct_ev_stock(double observed, const EvCalibration& c) {
  const double g = ev_growth_factor(observed, c);
  const double s0 = c.initial_value ? *c.initial_value : c.initial_fraction * observed;
  std::vector<double> values;
  for (int y = c.start_year; y <= c.anchor_year; ++y) values.push_back(s0 * std::pow(g, y - c.start_year));
  values.back() = observed;
  return YearSeries(c.start_year, std::move(values));
}

YearSeries increments(const YearSeries& level) {
  YearSeries out;
  if (level.empty()) return out;
  double previous = 0.0;
  for (int y = level.first_year(); y <= level.last_year(); ++y) {
    const double v = level.at(y);
    if (!std::isfinite(v) || v < previous) {
      throw InputError("level series must be finite and nondecreasing (year " + std::to_string(y) + ")");
    }
    out.set(y, v - previous);
    previous = v;
  }
  return out;
}

void ScenarioSpec::validate() const {
  if (!(demand_growth_rate >= 0.0 && demand_growth_rate <= 0.2)) {
    throw ConfigError("demand growth rate must lie in [0, 0.2]");
  }
  if (first_year > last_year) throw ConfigError("scenario first_year after last_year");
  if (base_year >= first_year) throw ConfigError("base year must precede the projection horizon");
  for (const auto& [cls, gw] : generation_base_gw) {
    if (!(gw >= 0.0) || !std::isfinite(gw)) {
      throw ConfigError("generation base for " + std::string(gse::name(cls)) + " must be nonnegative");
    }
  }
  if (!datacenter_load_gw.contains(last_year)) {
    throw ConfigError("data center load series must reach " + std::to_string(last_year));
  }
  if (!ev_stock_gw.contains(last_year)) {
    throw ConfigError("EV stock series must reach " + std::to_string(last_year));
  }
}

DemandSchedule::DemandSchedule(int first_year, int last_year)
    : first_year_(first_year), last_year_(last_year) {
  for (auto& v : cells_) v.assign(static_cast<std::size_t>(last_year - first_year + 1), {});
}

std::vector<int> DemandSchedule::years() const {
  std::vector<int> out;
  for (int y = first_year_; y <= last_year_; ++y) out.push_back(y);
  return out;
}

std::size_t DemandSchedule::offset(int year) const {
  if (year < first_year_ || year > last_year_) {
    throw InputError("year " + std::to_string(year) + " outside demand schedule");
  }
  return static_cast<std::size_t>(year - first_year_);
}

const DemandCell& DemandSchedule::cell(EquipmentClass e, int year) const {
  return cells_[index(e)][offset(year)];
}

DemandCell& DemandSchedule::cell(EquipmentClass e, int year) { return cells_[index(e)][offset(year)]; }

ClassArray<double> DemandSchedule::totals(int year) const {
  ClassArray<double> out{};
  for (auto e : all_classes()) out[index(e)] = total(e, year);
  return out;
}

bool uses_generation_history(EquipmentClass e) {
  return e == EquipmentClass::transformer || layer_of(e) == Layer::generation;
}

ClassArray<YearSeries> net_additions(const ScenarioSpec& scenario, const History& history,
                                     const RatioTable& ratios) {
  scenario.validate();
  ClassArray<YearSeries> out;

  for (auto e : all_classes()) {
    const double rho = ratios[index(e)];
    if (!(rho > 0.0)) throw ConfigError("capacity ratio for " + std::string(name(e)) + " must be positive");
    YearSeries& series = out[index(e)];

    if (uses_generation_history(e)) {
      auto it = history.find(e);
      if (it == history.end() || it->second.empty()) {
        throw InputError("missing history for " + std::string(name(e)));
      }
      const YearSeries& h = it->second;
      if (h.first_year() >= scenario.first_year || h.last_year() < scenario.first_year - 1) {
        throw InputError("history for " + std::string(name(e)) + " must cover the years up to " +
                         std::to_string(scenario.first_year - 1));
      }
      for (int y = h.first_year(); y < scenario.first_year; ++y) series.set(y, h.at(y));

      double base = 0.0;
      if (auto b = scenario.generation_base_gw.find(e); b != scenario.generation_base_gw.end()) {
        base = b->second;
      }
      // Wind additions after the record are assumed full-converter, so the
      // partial-converter fleet only sees replacement demand.
      if (e == EquipmentClass::dfig_converter) base = 0.0;
      for (int y = scenario.first_year; y <= scenario.last_year; ++y) {
        const double driver = base * std::pow(1.0 + scenario.demand_growth_rate, y - scenario.base_year);
        series.set(y, rho * driver);
      }
      continue;
    }

    const YearSeries& level = e == EquipmentClass::ev_charger_pcs ? scenario.ev_stock_gw
                                                                  : scenario.datacenter_load_gw;
    const YearSeries delta = increments(level);
    for (int y = delta.first_year(); y <= scenario.last_year; ++y) series.set(y, rho * delta.at(y));
  }
  return out;
}

DemandSchedule project_demand(const ScenarioSpec& scenario, const History& history,
                              const survival::LifetimeTable& lifetimes, const RatioTable& ratios) {
  const auto additions = net_additions(scenario, history, ratios);
  DemandSchedule schedule(scenario.first_year, scenario.last_year);

  for (auto e : all_classes()) {
    const YearSeries& c = additions[index(e)];
    const auto& params = lifetimes[index(e)].for_case(scenario.lifetime_case);
    const auto ledger = survival::build_cohort_ledger(c.first_year(), c.values(), params);

    const bool dtr = scenario.dtr_enabled &&
                     (e == EquipmentClass::transformer || e == EquipmentClass::dc_transformer);
    const double scale = dtr ? 1.0 - kDtrReduction : 1.0;
    for (int y = scenario.first_year; y <= scenario.last_year; ++y) {
      auto& cell = schedule.cell(e, y);
      cell.new_gva = ledger.net_addition(y) * scale;
      cell.replacement_gva = ledger.replacement(y) * scale;
    }
  }
  return schedule;
}

void write_schedule_csv(std::ostream& out, const DemandSchedule& schedule) {
  csv::Writer w(out);
  w.row({"class", "year", "new_gva", "replacement_gva", "total_gva"});
  for (auto e : all_classes()) {
    for (int y : schedule.years()) {
      const auto& c = schedule.cell(e, y);
      w.row({std::string(name(e)), std::to_string(y), csv::format_fixed(c.new_gva, 3),
             csv::format_fixed(c.replacement_gva, 3), csv::format_fixed(c.total(), 3)});
    }
  }
}

}  // namespace gse::demand
