#include "gse/mrsut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <string>

#include "gse/csv.hpp"
#include "gse/error.hpp"

namespace gse::mrsut {

namespace {

constexpr double kBalanceTolerance = 1e-6;

bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool sums_match(const Vector& sums, const Vector& expected) {
  if (sums.size() != expected.size()) return false;
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (!close_relative(sums[i], expected[i], kBalanceTolerance)) return false;
  }
  return true;
}

void require_nonnegative(const Matrix& m, const char* what) {
  if (!m.allFinite() || (m.array() < 0.0).any()) {
    throw InputError(std::string(what) + " must be finite and nonnegative");
  }
}

std::pair<std::string, std::string> split_label(const std::string& label) {
  auto slash = label.find('/');
  if (slash == std::string::npos) return {"", label};
  return {label.substr(0, slash), label.substr(slash + 1)};
}

}  // namespace

std::string Axes::product_label(std::size_t i) const {
  return regions.at(i / products.size()) + "/" + products.at(i % products.size());
}

std::string Axes::industry_label(std::size_t i) const {
  return regions.at(i / industries.size()) + "/" + industries.at(i % industries.size());
}

std::optional<std::size_t> Axes::find_region(const std::string& region) const {
  auto it = std::find(regions.begin(), regions.end(), region);
  if (it == regions.end()) return std::nullopt;
  return static_cast<std::size_t>(it - regions.begin());
}

std::optional<std::size_t> Axes::find_product(const std::string& label) const {
  auto [region, product] = split_label(label);
  auto r = find_region(region);
  auto it = std::find(products.begin(), products.end(), product);
  if (!r || it == products.end()) return std::nullopt;
  return *r * products.size() + static_cast<std::size_t>(it - products.begin());
}

std::optional<std::size_t> Axes::find_industry(const std::string& label) const {
  auto [region, industry] = split_label(label);
  auto r = find_region(region);
  auto it = std::find(industries.begin(), industries.end(), industry);
  if (!r || it == industries.end()) return std::nullopt;
  return *r * industries.size() + static_cast<std::size_t>(it - industries.begin());
}

std::vector<std::size_t> Axes::product_indices(const std::string& product) const {
  std::vector<std::size_t> out;
  auto it = std::find(products.begin(), products.end(), product);
  if (it == products.end()) return out;
  const auto local = static_cast<std::size_t>(it - products.begin());
  for (std::size_t r = 0; r < regions.size(); ++r) out.push_back(r * products.size() + local);
  return out;
}

SupplyUseSystem SupplyUseSystem::create(Axes axes, Matrix use, Matrix supply,
                                        std::optional<Vector> industry_output,
                                        std::optional<Vector> product_output) {
  const auto np = static_cast<Eigen::Index>(axes.product_count());
  const auto ni = static_cast<Eigen::Index>(axes.industry_count());
  if (np == 0 || ni == 0) throw InputError("supply-use axes must be nonempty");
  if (use.rows() != np || use.cols() != ni) {
    throw InputError("use table must be products x industries (" + std::to_string(np) + " x " +
                     std::to_string(ni) + ")");
  }
  require_nonnegative(use, "use table");
  require_nonnegative(supply, "supply table");

  // Published supply tables come in both orientations.
  if (supply.rows() == ni && supply.cols() == np && np != ni) {
    supply.transposeInPlace();
  } else if (np == ni && industry_output) {
    const bool as_given = sums_match(supply.colwise().sum().transpose(), *industry_output);
    const bool transposed = sums_match(supply.rowwise().sum(), *industry_output);
    if (!as_given && transposed) supply.transposeInPlace();
  }
  if (supply.rows() != np || supply.cols() != ni) {
    throw InputError("supply table shape does not match the axes");
  }

  Vector g = supply.colwise().sum().transpose();
  Vector q = supply.rowwise().sum();
  if (industry_output && !sums_match(g, *industry_output)) {
    throw InconsistencyError("supply table column sums disagree with industry output");
  }
  if (product_output && !sums_match(q, *product_output)) {
    throw InconsistencyError("supply table row sums disagree with product output");
  }

  SupplyUseSystem s;
  s.axes_ = std::move(axes);
  s.use_ = std::move(use);
  s.supply_ = std::move(supply);
  s.g_ = industry_output ? *industry_output : g;
  s.q_ = product_output ? *product_output : q;
  return s;
}

Matrix normalize_use(const Matrix& use, const Vector& industry_output, DropReport* dropped) {
  if (use.cols() != industry_output.size()) throw InputError("use table and industry output do not conform");
  Matrix b = Matrix::Zero(use.rows(), use.cols());
  for (Eigen::Index j = 0; j < use.cols(); ++j) {
    const double g = industry_output[j];
    if (g > 0.0) {
      b.col(j) = use.col(j) / g;
      continue;
    }
    if (use.col(j).cwiseAbs().maxCoeff() > 0.0) {
      throw InconsistencyError("industry " + std::to_string(j) + " uses inputs but has no output");
    }
    if (dropped) dropped->industries.push_back(static_cast<std::size_t>(j));
  }
  return b;
}

Matrix market_shares(const Matrix& supply, const Vector& product_output, DropReport* dropped) {
  if (supply.rows() != product_output.size()) throw InputError("supply table and product output do not conform");
  Matrix c = Matrix::Zero(supply.cols(), supply.rows());
  for (Eigen::Index p = 0; p < supply.rows(); ++p) {
    const double q = product_output[p];
    if (q > 0.0) {
      c.col(p) = supply.row(p).transpose() / q;
      continue;
    }
    if (supply.row(p).cwiseAbs().maxCoeff() > 0.0) {
      throw InconsistencyError("product " + std::to_string(p) + " is supplied but has no output");
    }
    if (dropped) dropped->products.push_back(static_cast<std::size_t>(p));
  }
  return c;
}

Matrix ita_coefficients(const Matrix& normalized_use, const Matrix& shares) {
  if (normalized_use.cols() != shares.rows() || normalized_use.rows() != shares.cols()) {
    throw InputError("normalized use (" + std::to_string(normalized_use.rows()) + "x" +
                     std::to_string(normalized_use.cols()) + ") and market shares (" +
                     std::to_string(shares.rows()) + "x" + std::to_string(shares.cols()) +
                     ") do not form a product-by-product matrix");
  }
  return normalized_use * shares;
}

SpectralEstimate spectral_radius(const Matrix& a, double tol, int max_iterations) {
  if (a.rows() != a.cols()) throw InputError("spectral radius needs a square matrix");
  SpectralEstimate est;
  if (a.size() == 0) {
    est.converged = true;
    return est;
  }
  const Matrix abs_a = a.cwiseAbs();
  Vector x = Vector::Ones(a.rows());
  for (int it = 1; it <= max_iterations; ++it) {
    // For x > 0 the ratios (|A|x)_i / x_i bracket the Perron root; the identity
    // shift keeps x strictly positive and removes periodic oscillation.
    const Vector ax = abs_a * x;
    const Vector ratios = ax.cwiseQuotient(x);
    est.lower = ratios.minCoeff();
    est.upper = ratios.maxCoeff();
    est.iterations = it;
    if (est.upper - est.lower <= tol) {
      est.converged = true;
      est.radius = 0.5 * (est.lower + est.upper);
      return est;
    }
    x = x + ax;
    x /= x.maxCoeff();
  }
  est.radius = est.upper;
  return est;
}

LayeredRequirements neumann_layers(const Matrix& a, const NeumannOptions& options) {
  if (a.rows() != a.cols()) throw InputError("Neumann series needs a square matrix");
  if (options.max_layers < 0 || !(options.tol >= 0.0)) throw ConfigError("invalid Neumann options");
  if ((a.array() < 0.0).any()) throw InputError("technical coefficients must be nonnegative");

  LayeredRequirements out;
  out.spectral = spectral_radius(a);
  if (out.spectral.radius >= 1.0) {
    throw NonProductiveError("production system is not productive: spectral radius " +
                                 std::to_string(out.spectral.radius) + " >= 1",
                             out.spectral.radius);
  }

  const auto n = a.rows();
  Matrix term = Matrix::Identity(n, n);
  out.total = term;
  out.layer_norms.push_back(n > 0 ? 1.0 : 0.0);
  if (options.keep_terms) out.terms.push_back(term);

  for (int k = 1; k <= options.max_layers; ++k) {
    if (out.layer_norms.back() < options.tol) break;
    term = term * a;
    out.total += term;
    out.layer_norms.push_back(n > 0 ? term.cwiseAbs().maxCoeff() : 0.0);
    if (options.keep_terms) out.terms.push_back(term);
    out.layers = k;
  }

  const double norm = n > 0 ? a.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  if (norm < 1.0) out.residual_bound = std::pow(norm, out.layers + 1) / (1.0 - norm);
  return out;
}

Vector gse_final_demand(const Vector& final_demand, std::span<const std::size_t> parent_indices, double phi) {
  if (!(phi > 0.0 && phi <= 1.0)) throw ConfigError("allocation factor must lie in (0, 1]");
  Vector out = final_demand;
  for (auto i : parent_indices) {
    if (static_cast<Eigen::Index>(i) >= out.size()) throw InputError("parent index out of range");
    out[static_cast<Eigen::Index>(i)] *= phi;
  }
  return out;
}

double MaterialSourcing::total(Material m) const {
  double t = 0.0;
  for (double v : mass_kg[index(m)]) t += v;
  return t;
}

std::vector<double> MaterialSourcing::shares(Material m) const {
  const auto& v = mass_kg[index(m)];
  std::vector<double> out(v.size(), 0.0);
  const double t = total(m);
  if (t <= 0.0) return out;
  for (std::size_t r = 0; r < v.size(); ++r) out[r] = v[r] / t;
  return out;
}

double MaterialSourcing::mass(Material m, const std::string& region) const {
  auto it = std::find(regions.begin(), regions.end(), region);
  if (it == regions.end()) throw InputError("unknown region '" + region + "'");
  return mass_kg[index(m)][static_cast<std::size_t>(it - regions.begin())];
}

MaterialSourcing trace_material_sourcing(const SupplyUseSystem& system, const LayeredRequirements& layers,
                                         const Vector& gse_demand, const Concordance& concordance,
                                         const MassFactors& mass_factors, int year) {
  const Axes& axes = system.axes();
  const auto np = static_cast<Eigen::Index>(axes.product_count());
  if (layers.total.rows() != np || gse_demand.size() != np) {
    throw InputError("layered requirements and final demand must match the product axis");
  }

  MaterialSourcing out;
  out.year = year;
  out.regions = axes.regions;
  for (auto& v : out.mass_kg) v.assign(axes.regions.size(), 0.0);

  const Vector flows = layers.total * gse_demand;
  for (const auto& [group, material] : concordance) {
    const auto indices = axes.product_indices(group);
    if (indices.empty()) throw ConcordanceError("product group '" + group + "' is not on the product axis");
    auto factor = mass_factors.find(material);
    if (factor == mass_factors.end()) {
      throw ConcordanceError("no mass factor for material '" + std::string(name(material)) + "'");
    }
    if (!(factor->second > 0.0)) throw ConcordanceError("mass factors must be positive");
    for (auto i : indices) {
      out.mass_kg[index(material)][axes.region_of_product(i)] +=
          flows[static_cast<Eigen::Index>(i)] * factor->second;
    }
  }
  return out;
}

MaterialSourcing apply_trade_disruption(const MaterialSourcing& sourcing,
                                        const std::set<std::string>& restricted_regions, double cut) {
  if (!(cut >= 0.0 && cut <= 1.0)) throw ConfigError("trade cut must lie in [0, 1]");
  MaterialSourcing out = sourcing;
  for (const auto& region : restricted_regions) {
    auto it = std::find(out.regions.begin(), out.regions.end(), region);
    if (it == out.regions.end()) throw ConfigError("unknown restricted region '" + region + "'");
    const auto r = static_cast<std::size_t>(it - out.regions.begin());
    for (auto& v : out.mass_kg) v[r] *= 1.0 - cut;
  }
  return out;
}

MaterialArray<std::vector<double>> extrapolate_shares(std::span<const MaterialSourcing> observed,
                                                      int target_year) {
  if (observed.empty()) throw InputError("no observed sourcing years to extrapolate from");
  const auto regions = observed.front().regions.size();
  for (const auto& s : observed) {
    if (s.regions != observed.front().regions) throw InputError("observed sourcing region sets differ");
  }

  MaterialArray<std::vector<double>> out;
  double mean_year = 0.0;
  for (const auto& s : observed) mean_year += s.year;
  mean_year /= static_cast<double>(observed.size());
  double sxx = 0.0;
  for (const auto& s : observed) sxx += (s.year - mean_year) * (s.year - mean_year);

  for (auto m : all_materials()) {
    std::vector<double> projected(regions, 0.0);
    for (std::size_t r = 0; r < regions; ++r) {
      double mean_share = 0.0;
      for (const auto& s : observed) mean_share += s.shares(m)[r];
      mean_share /= static_cast<double>(observed.size());
      double sxy = 0.0;
      for (const auto& s : observed) sxy += (s.year - mean_year) * (s.shares(m)[r] - mean_share);
      const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
      projected[r] = std::max(0.0, mean_share + slope * (target_year - mean_year));
    }
    double total = 0.0;
    for (double v : projected) total += v;
    if (total > 0.0) {
      for (double& v : projected) v /= total;
    }
    out[index(m)] = std::move(projected);
  }
  return out;
}

Axes read_axes(const std::filesystem::path& manifest_json) {
  std::ifstream in(manifest_json);
  if (!in) throw InputError("cannot open " + manifest_json.string());
  try {
    const auto j = nlohmann::json::parse(in);
    Axes axes;
    axes.regions = j.at("regions").get<std::vector<std::string>>();
    axes.products = j.at("products").get<std::vector<std::string>>();
    axes.industries = j.at("industries").get<std::vector<std::string>>();
    if (axes.regions.empty() || axes.products.empty() || axes.industries.empty()) {
      throw InputError("axis manifest lists must be nonempty");
    }
    return axes;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(manifest_json.string() + ": " + e.what());
  }
}

Matrix read_triplets(const std::filesystem::path& path, const Axes& axes, bool* rows_are_industries) {
  const auto table = csv::read_file(path);
  const auto np = static_cast<Eigen::Index>(axes.product_count());
  const auto ni = static_cast<Eigen::Index>(axes.industry_count());

  // Orientation follows the labels of the first row carrying both kinds.
  bool industry_rows = false;
  if (table.size() > 0) {
    const auto& row = table.cell(0, "row_label");
    const auto& col = table.cell(0, "col_label");
    industry_rows = !axes.find_product(row) && axes.find_industry(row) && axes.find_product(col);
  }
  if (rows_are_industries) *rows_are_industries = industry_rows;

  Matrix m = industry_rows ? Matrix::Zero(ni, np) : Matrix::Zero(np, ni);
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table.cell(r, "row_label");
    const auto& col = table.cell(r, "col_label");
    auto ri = industry_rows ? axes.find_industry(row) : axes.find_product(row);
    auto ci = industry_rows ? axes.find_product(col) : axes.find_industry(col);
    if (!ri || !ci) {
      throw InputError(path.string() + ": unknown label pair (" + row + ", " + col + ")");
    }
    m(static_cast<Eigen::Index>(*ri), static_cast<Eigen::Index>(*ci)) += table.number(r, "value");
  }
  return m;
}

SupplyUseSystem load_system(const std::filesystem::path& manifest_json, const std::filesystem::path& use_csv,
                            const std::filesystem::path& supply_csv) {
  Axes axes = read_axes(manifest_json);
  bool use_transposed = false;
  Matrix use = read_triplets(use_csv, axes, &use_transposed);
  if (use_transposed) use.transposeInPlace();
  bool supply_transposed = false;
  Matrix supply = read_triplets(supply_csv, axes, &supply_transposed);
  if (supply_transposed) supply.transposeInPlace();
  return SupplyUseSystem::create(std::move(axes), std::move(use), std::move(supply));
}

Concordance read_concordance(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  Concordance out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    Material m{};
    try {
      m = parse_material(table.cell(r, "material"));
    } catch (const InputError& e) {
      throw ConcordanceError(path.string() + ": " + e.what());
    }
    out.emplace_back(table.cell(r, "product_group"), m);
  }
  return out;
}

MassFactors read_mass_factors(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  MassFactors out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto m = parse_material(table.cell(r, "material"));
    const double f = table.number(r, "kg_per_unit_value");
    if (!(f > 0.0)) throw InputError(path.string() + ": mass factors must be positive");
    if (!out.emplace(m, f).second) throw InputError(path.string() + ": duplicate mass factor");
  }
  return out;
}

}  // namespace gse::mrsut
