#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gse/types.hpp"

namespace gse::mrsut {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Region/product/industry label axes of a multi-regional system. Product rows
// and industry columns are region-major: index = region * count + local.
struct Axes {
  std::vector<std::string> regions;
  std::vector<std::string> products;
  std::vector<std::string> industries;

  std::size_t product_count() const { return regions.size() * products.size(); }
  std::size_t industry_count() const { return regions.size() * industries.size(); }

  std::string product_label(std::size_t i) const;
  std::string industry_label(std::size_t i) const;
  std::size_t region_of_product(std::size_t i) const { return i / products.size(); }
  const std::string& product_name(std::size_t i) const { return products[i % products.size()]; }

  std::optional<std::size_t> find_product(const std::string& label) const;
  std::optional<std::size_t> find_industry(const std::string& label) const;
  std::optional<std::size_t> find_region(const std::string& region) const;

  // Every product index whose local product name equals `product`.
  std::vector<std::size_t> product_indices(const std::string& product) const;
};

// Indices that carried no output and were zeroed out of the coefficients.
struct DropReport {
  std::vector<std::size_t> industries;
  std::vector<std::size_t> products;
  bool empty() const { return industries.empty() && products.empty(); }
};

// Use table U and supply table V, both stored products x industries, with
// industry output g (column sums of V) and product output q (row sums of V).
class SupplyUseSystem {
 public:
  // The supply table may be given in either orientation; it is transposed when
  // its shape or, for square tables, its sums against `industry_output` call
  // for it. Supplied output vectors must agree with V within 1e-6 relative.
  static SupplyUseSystem create(Axes axes, Matrix use, Matrix supply,
                                std::optional<Vector> industry_output = std::nullopt,
                                std::optional<Vector> product_output = std::nullopt);

  const Axes& axes() const { return axes_; }
  const Matrix& use() const { return use_; }
  const Matrix& supply() const { return supply_; }
  const Vector& industry_output() const { return g_; }
  const Vector& product_output() const { return q_; }

 private:
  SupplyUseSystem() = default;

  Axes axes_;
  Matrix use_;
  Matrix supply_;
  Vector g_;
  Vector q_;
};

// B = U * diag(g)^-1. Zero-output industries get a zero column (reported in
// `dropped`); a zero-output industry that still uses inputs is an InconsistencyError.
Matrix normalize_use(const Matrix& use, const Vector& industry_output, DropReport* dropped = nullptr);

// Industry-by-product supply shares C (industries x products): column p holds
// the share of product p supplied by each industry and sums to 1.
Matrix market_shares(const Matrix& supply, const Vector& product_output, DropReport* dropped = nullptr);

// Product-by-product coefficients under the industry technology assumption.
Matrix ita_coefficients(const Matrix& normalized_use, const Matrix& shares);

struct SpectralEstimate {
  double radius = 0.0;
  double lower = 0.0;  // Collatz-Wielandt bounds on the Perron root
  double upper = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Perron root of |A| by power iteration on I + |A| from the all-ones vector.
// When the bounds do not close within max_iterations the upper bound is reported.
SpectralEstimate spectral_radius(const Matrix& a, double tol = 1e-10, int max_iterations = 10000);

struct NeumannOptions {
  int max_layers = 200;
  double tol = 1e-9;
  bool keep_terms = true;
};

// Truncated power series sum_{k=0..n} A^k with its per-layer terms.
struct LayeredRequirements {
  Matrix total;
  std::vector<Matrix> terms;       // A^0 .. A^n when kept
  std::vector<double> layer_norms; // max-abs entry of each term
  int layers = 0;                  // n
  SpectralEstimate spectral;
  // ||A||^(n+1) / (1 - ||A||) in the max-row-sum norm, when ||A|| < 1.
  std::optional<double> residual_bound;
};

// Throws NonProductiveError when the spectral radius is >= 1. Stops after the
// first layer whose max-norm drops below `tol`, or at max_layers.
LayeredRequirements neumann_layers(const Matrix& a, const NeumannOptions& options = {});

inline constexpr double kDefaultAllocationFactor = 0.046;

// Scales the parent-category coordinates of `final_demand` by phi.
Vector gse_final_demand(const Vector& final_demand, std::span<const std::size_t> parent_indices,
                        double phi = kDefaultAllocationFactor);

// product group (local product name) -> material. A group may feed several
// materials; each material's mass factor is per unit value of its group.
using Concordance = std::vector<std::pair<std::string, Material>>;
using MassFactors = std::map<Material, double>;

struct MaterialSourcing {
  int year = 0;
  std::vector<std::string> regions;
  MaterialArray<std::vector<double>> mass_kg;  // per region

  double total(Material m) const;
  // Regional shares; all zero when the material has no mass.
  std::vector<double> shares(Material m) const;
  double mass(Material m, const std::string& region) const;
};

MaterialSourcing trace_material_sourcing(const SupplyUseSystem& system,
                                         const LayeredRequirements& layers, const Vector& gse_demand,
                                         const Concordance& concordance, const MassFactors& mass_factors,
                                         int year);

MaterialSourcing apply_trade_disruption(const MaterialSourcing& sourcing,
                                        const std::set<std::string>& restricted_regions,
                                        double cut = 0.7);

// Least-squares linear trend of each region's share over the observed years,
// evaluated at target_year, clipped at zero and renormalized.
MaterialArray<std::vector<double>> extrapolate_shares(std::span<const MaterialSourcing> observed,
                                                      int target_year);

// --- file interchange -----------------------------------------------------

Axes read_axes(const std::filesystem::path& manifest_json);
// Triplet CSV row_label,col_label,value. Labels are "region/name"; the row
// axis may be products or industries.
Matrix read_triplets(const std::filesystem::path& path, const Axes& axes, bool* rows_are_industries = nullptr);
SupplyUseSystem load_system(const std::filesystem::path& manifest_json, const std::filesystem::path& use_csv,
                            const std::filesystem::path& supply_csv);
Concordance read_concordance(const std::filesystem::path& path);
MassFactors read_mass_factors(const std::filesystem::path& path);

}  // namespace gse::mrsut
