#include "gse/types.hpp"

#include <algorithm>

#include "gse/error.hpp"

namespace gse {

namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "transformer",    "dc_transformer", "spv_inverter", "dfig_converter",
    "pmsg_converter", "battery_pcs",    "dc_ups",       "ev_charger_pcs",
};

constexpr std::array<std::string_view, kMaterialCount> kMaterialNames = {
    "steel", "copper",  "aluminum", "nickel",    "zinc",
    "tin",   "silicon", "silver",   "manganese", "magnesium",
};

}  // namespace

const std::array<EquipmentClass, kClassCount>& all_classes() {
  static const std::array<EquipmentClass, kClassCount> classes = [] {
    std::array<EquipmentClass, kClassCount> out{};
    for (std::size_t i = 0; i < kClassCount; ++i) out[i] = static_cast<EquipmentClass>(i);
    return out;
  }();
  return classes;
}

const std::array<Material, kMaterialCount>& all_materials() {
  static const std::array<Material, kMaterialCount> materials = [] {
    std::array<Material, kMaterialCount> out{};
    for (std::size_t i = 0; i < kMaterialCount; ++i) out[i] = static_cast<Material>(i);
    return out;
  }();
  return materials;
}

std::string_view name(EquipmentClass e) { return kClassNames.at(index(e)); }
std::string_view name(Material m) { return kMaterialNames.at(index(m)); }

std::string_view name(Layer l) {
  switch (l) {
    case Layer::grid:
      return "grid";
    case Layer::generation:
      return "generation";
    case Layer::consumption:
      return "consumption";
  }
  return "?";
}

EquipmentClass parse_class(std::string_view s) {
  auto it = std::find(kClassNames.begin(), kClassNames.end(), s);
  if (it == kClassNames.end()) throw InputError("unknown equipment class '" + std::string(s) + "'");
  return static_cast<EquipmentClass>(it - kClassNames.begin());
}

Material parse_material(std::string_view s) {
  auto it = std::find(kMaterialNames.begin(), kMaterialNames.end(), s);
  if (it == kMaterialNames.end()) throw InputError("unknown material '" + std::string(s) + "'");
  return static_cast<Material>(it - kMaterialNames.begin());
}

Layer layer_of(EquipmentClass e) {
  switch (e) {
    case EquipmentClass::transformer:
      return Layer::grid;
    case EquipmentClass::spv_inverter:
    case EquipmentClass::dfig_converter:
    case EquipmentClass::pmsg_converter:
    case EquipmentClass::battery_pcs:
      return Layer::generation;
    case EquipmentClass::dc_transformer:
    case EquipmentClass::dc_ups:
    case EquipmentClass::ev_charger_pcs:
      return Layer::consumption;
  }
  return Layer::consumption;
}

const std::array<EquipmentClass, kClassCount>& priority_order() {
  static const std::array<EquipmentClass, kClassCount> order = [] {
    std::array<EquipmentClass, kClassCount> out = all_classes();
    std::stable_sort(out.begin(), out.end(), [](EquipmentClass a, EquipmentClass b) {
      auto la = static_cast<int>(layer_of(a));
      auto lb = static_cast<int>(layer_of(b));
      if (la != lb) return la < lb;
      return name(a) < name(b);
    });
    return out;
  }();
  return order;
}

ReportGroup report_group(EquipmentClass e) {
  if (e == EquipmentClass::transformer) return ReportGroup::transformer;
  return layer_of(e) == Layer::generation ? ReportGroup::other_supply_side : ReportGroup::load_side;
}

std::string_view name(ReportGroup g) {
  switch (g) {
    case ReportGroup::transformer:
      return "transformer";
    case ReportGroup::other_supply_side:
      return "other_supply_side";
    case ReportGroup::load_side:
      return "load_side";
  }
  return "?";
}

double YearSeries::at(int year) const {
  if (!contains(year)) {
    throw InputError("year " + std::to_string(year) + " outside series range [" +
                     std::to_string(first_year_) + ", " + std::to_string(last_year()) + "]");
  }
  return values_[static_cast<std::size_t>(year - first_year_)];
}

void YearSeries::set(int year, double v) {
  if (empty()) {
    first_year_ = year;
    values_.push_back(v);
    return;
  }
  if (year < first_year_) {
    values_.insert(values_.begin(), static_cast<std::size_t>(first_year_ - year), 0.0);
    first_year_ = year;
  } else if (year > last_year()) {
    values_.resize(static_cast<std::size_t>(year - first_year_ + 1), 0.0);
  }
  values_[static_cast<std::size_t>(year - first_year_)] = v;
}

}  // namespace gse
