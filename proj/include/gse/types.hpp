#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gse {

enum class EquipmentClass : std::size_t {
  transformer,
  dc_transformer,
  spv_inverter,
  dfig_converter,
  pmsg_converter,
  battery_pcs,
  dc_ups,
  ev_charger_pcs,
};
inline constexpr std::size_t kClassCount = 8;

enum class Layer { grid, generation, consumption };

enum class Material : std::size_t {
  steel,
  copper,
  aluminum,
  nickel,
  zinc,
  tin,
  silicon,
  silver,
  manganese,
  magnesium,
};
inline constexpr std::size_t kMaterialCount = 10;

template <typename T>
using ClassArray = std::array<T, kClassCount>;
template <typename T>
using MaterialArray = std::array<T, kMaterialCount>;

constexpr std::size_t index(EquipmentClass e) { return static_cast<std::size_t>(e); }
constexpr std::size_t index(Material m) { return static_cast<std::size_t>(m); }

// Enum order; use priority_order() where a deterministic layered order is needed.
const std::array<EquipmentClass, kClassCount>& all_classes();
const std::array<Material, kMaterialCount>& all_materials();

std::string_view name(EquipmentClass e);
std::string_view name(Material m);
std::string_view name(Layer l);

// Throws InputError on unknown names.
EquipmentClass parse_class(std::string_view s);
Material parse_material(std::string_view s);

Layer layer_of(EquipmentClass e);

// Grid first, then generation, then consumption; alphabetical within a layer.
const std::array<EquipmentClass, kClassCount>& priority_order();

// Reporting groups used for gap tables: the transformer fleet, the remaining
// supply-side power electronics, and load-side equipment.
enum class ReportGroup { transformer, other_supply_side, load_side };
ReportGroup report_group(EquipmentClass e);
std::string_view name(ReportGroup g);

// Dense annual series starting at first_year.
class YearSeries {
 public:
  YearSeries() = default;
  YearSeries(int first_year, std::vector<double> values)
      : first_year_(first_year), values_(std::move(values)) {}

  int first_year() const { return first_year_; }
  int last_year() const { return first_year_ + static_cast<int>(values_.size()) - 1; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  bool contains(int year) const { return !empty() && year >= first_year_ && year <= last_year(); }

  // Throws InputError when the year is not covered.
  double at(int year) const;
  // 0 outside the covered range.
  double value_or_zero(int year) const { return contains(year) ? at(year) : 0.0; }

  void set(int year, double v);
  void push_back(double v) { values_.push_back(v); }

  const std::vector<double>& values() const { return values_; }

 private:
  int first_year_ = 0;
  std::vector<double> values_;
};

}  // namespace gse
