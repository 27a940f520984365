#include "gse/bom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "gse/csv.hpp"
#include "gse/error.hpp"

namespace gse::bom {

void BomMatrix::set(Material m, EquipmentClass e, double kg_per_mva) {
  if (!std::isfinite(kg_per_mva) || kg_per_mva < 0.0) {
    throw InputError("BOM coefficient for (" + std::string(name(m)) + ", " + std::string(name(e)) +
                     ") must be finite and nonnegative");
  }
  kg_per_mva_[index(m)][index(e)] = kg_per_mva;
}

double BomMatrix::class_total(EquipmentClass e) const {
  double total = 0.0;
  for (auto m : all_materials()) total += at(m, e);
  return total;
}

BomMatrix default_bom() {
  using E = EquipmentClass;
  using M = Material;
  BomMatrix b;
  b.set(M::steel, E::transformer, 1030.0);
  b.set(M::copper, E::transformer, 66.1);
  b.set(M::aluminum, E::transformer, 16.07);

  b.set(M::steel, E::dc_transformer, 445.728);
  b.set(M::copper, E::dc_transformer, 280.416);
  b.set(M::aluminum, E::dc_transformer, 129.792);

  b.set(M::steel, E::spv_inverter, 2640.0);
  b.set(M::copper, E::spv_inverter, 370.0);
  b.set(M::aluminum, E::spv_inverter, 30.4);
  b.set(M::nickel, E::spv_inverter, 6.85);

  b.set(M::steel, E::pmsg_converter, 1102.0);
  b.set(M::copper, E::pmsg_converter, 519.1);

  b.set(M::aluminum, E::dfig_converter, 2011.0);
  b.set(M::copper, E::dfig_converter, 256.6);
  b.set(M::zinc, E::dfig_converter, 133.4);
  b.set(M::silver, E::dfig_converter, 3.132);

  b.set(M::steel, E::battery_pcs, 370.92);
  b.set(M::aluminum, E::battery_pcs, 91.476);
  b.set(M::copper, E::battery_pcs, 30.954);

  b.set(M::steel, E::ev_charger_pcs, 353.16);
  b.set(M::copper, E::ev_charger_pcs, 306.508);
  b.set(M::aluminum, E::ev_charger_pcs, 264.979);
  b.set(M::manganese, E::ev_charger_pcs, 22.999);

  b.set(M::steel, E::dc_ups, 441.6);
  b.set(M::aluminum, E::dc_ups, 86.4);
  b.set(M::copper, E::dc_ups, 70.4);
  return b;
}

std::vector<std::pair<Material, EquipmentClass>> unquantified_cells() {
  std::vector<std::pair<Material, EquipmentClass>> out;
  for (auto e : {EquipmentClass::dc_transformer, EquipmentClass::pmsg_converter,
                 EquipmentClass::battery_pcs}) {
    for (auto m : {Material::tin, Material::silicon, Material::magnesium}) out.emplace_back(m, e);
  }
  return out;
}

MaterialArray<double> material_demand(const ClassArray<double>& capacity_gva, const BomMatrix& bom) {
  MaterialArray<double> mass{};
  for (auto m : all_materials()) {
    double kg = 0.0;
    for (auto e : all_classes()) kg += bom.at(m, e) * capacity_gva[index(e)] * kMvaPerGva;
    mass[index(m)] = kg;
  }
  return mass;
}

std::vector<MaterialArray<double>> material_demand(const demand::DemandSchedule& schedule,
                                                   const BomMatrix& bom) {
  std::vector<MaterialArray<double>> out;
  for (int y : schedule.years()) out.push_back(material_demand(schedule.totals(y), bom));
  return out;
}

std::vector<ClassIntensity> intensity_ranking(const BomMatrix& bom) {
  std::vector<ClassIntensity> out;
  for (auto e : all_classes()) {
    ClassIntensity ci{e, {}, bom.class_total(e)};
    for (auto m : all_materials()) {
      if (bom.at(m, e) > 0.0) ci.materials.emplace_back(m, bom.at(m, e));
    }
    std::stable_sort(ci.materials.begin(), ci.materials.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out.push_back(std::move(ci));
  }
  return out;
}

BomMatrix read_csv(std::istream& in) {
  const auto table = csv::parse(in, "BOM");
  BomMatrix bom;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto m = parse_material(table.cell(r, "material"));
    const auto e = parse_class(table.cell(r, "equipment_class"));
    if (!seen.emplace(index(m), index(e)).second) {
      throw InputError("duplicate BOM cell (" + std::string(name(m)) + ", " + std::string(name(e)) + ")");
    }
    bom.set(m, e, table.number(r, "kg_per_mva"));
  }
  return bom;
}

BomMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const BomMatrix& bom) {
  csv::Writer w(out);
  w.row({"material", "equipment_class", "kg_per_mva"});
  for (auto m : all_materials()) {
    for (auto e : all_classes()) {
      w.row({std::string(name(m)), std::string(name(e)), csv::format_roundtrip(bom.at(m, e))});
    }
  }
}

}  // namespace gse::bom
