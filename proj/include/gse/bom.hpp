#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "gse/demand.hpp"
#include "gse/types.hpp"

namespace gse::bom {

// Material intensity in kg per MVA of rated capacity, over (material x class).
// Cells not set are zero.
class BomMatrix {
 public:
  BomMatrix() = default;

  double at(Material m, EquipmentClass e) const { return kg_per_mva_[index(m)][index(e)]; }
  // Throws InputError for negative or non-finite values.
  void set(Material m, EquipmentClass e, double kg_per_mva);

  // Total kg/MVA of one class over all materials.
  double class_total(EquipmentClass e) const;

  friend bool operator==(const BomMatrix&, const BomMatrix&) = default;

 private:
  MaterialArray<ClassArray<double>> kg_per_mva_{};
};

BomMatrix default_bom();

// Cells of the embedded matrix that are known to be nonzero but unquantified;
// they are held at zero rather than guessed and can be overridden by file.
std::vector<std::pair<Material, EquipmentClass>> unquantified_cells();

inline constexpr double kMvaPerGva = 1000.0;

// Embodied mass (kg) of a capacity vector given in GVA.
MaterialArray<double> material_demand(const ClassArray<double>& capacity_gva, const BomMatrix& bom);

// Embodied mass (kg) per material and year for a whole schedule.
std::vector<MaterialArray<double>> material_demand(const demand::DemandSchedule& schedule,
                                                   const BomMatrix& bom);

struct ClassIntensity {
  EquipmentClass equipment_class{};
  std::vector<std::pair<Material, double>> materials;  // descending kg/MVA, nonzero only
  double total = 0.0;
};

std::vector<ClassIntensity> intensity_ranking(const BomMatrix& bom);

// Interchange format: material,equipment_class,kg_per_mva. Reading starts from
// an all-zero matrix; duplicate cells are rejected.
BomMatrix read_csv(std::istream& in);
BomMatrix read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const BomMatrix& bom);

}  // namespace gse::bom
