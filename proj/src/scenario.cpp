#include "gse/scenario.hpp"

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "gse/csv.hpp"
#include "gse/error.hpp"

namespace gse::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be consumed, so typos in a
// config surface as errors instead of silently falling back to defaults.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& at(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ConfigError(where_ + ": missing key '" + key + "'");
    return *v;
  }

  std::string string(const std::string& key) { return as_string(at(key), key); }
  std::string string_or(const std::string& key, std::string fallback) {
    const json* v = find(key);
    return v ? as_string(*v, key) : fallback;
  }
  double number_or(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(where_ + ": '" + key + "' must be a number");
    return v->get<double>();
  }
  double number(const std::string& key) {
    at(key);
    return number_or(key, 0.0);
  }
  int integer_or(const std::string& key, int fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(where_ + ": '" + key + "' must be an integer");
    return v->get<int>();
  }
  bool boolean_or(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(where_ + ": '" + key + "' must be true or false");
    return v->get<bool>();
  }
  std::vector<std::string> strings_or(const std::string& key, std::vector<std::string> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(where_ + ": '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : *v) out.push_back(as_string(s, key));
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  std::string as_string(const json& v, const std::string& key) const {
    if (!v.is_string()) throw ConfigError(where_ + ": '" + key + "' must be a string");
    return v.get<std::string>();
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

json read_json(const fs::path& path, bool config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (config) throw ConfigError("cannot open " + path.string());
    throw InputError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    const std::string msg = path.string() + ": " + e.what();
    if (config) throw ConfigError(msg);
    throw InputError(msg);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

// Quiet unless set_verbose(true); one line per stage on stderr.
spdlog::logger& log() {
  static const auto logger = [] {
    auto l = spdlog::stderr_logger_mt("gse");
    l->set_pattern("%v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *logger;
}

class Stage {
 public:
  Stage(std::string name, std::string scenario)
      : name_(std::move(name)), scenario_(std::move(scenario)), start_(std::chrono::steady_clock::now()) {}
  ~Stage() {
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start_);
    log().info("stage={} scenario={} ms={:.3f}", name_, scenario_, us.count() / 1000.0);
  }

 private:
  std::string name_;
  std::string scenario_;
  std::chrono::steady_clock::time_point start_;
};

YearSeries case_series(const json& cases, const std::string& which, const std::string& what, int from, int to) {
  if (!cases.is_object() || !cases.contains(which)) {
    throw ConfigError(what + " case '" + which + "' is not defined in the trajectories file");
  }
  const json& c = cases.at(which);
  YearSeries out;
  for (int y = from; y <= to; ++y) {
    const auto key = std::to_string(y);
    if (!c.contains(key) || !c.at(key).is_number()) {
      throw InputError(what + " case '" + which + "' has no value for " + key);
    }
    out.set(y, c.at(key).get<double>());
  }
  return out;
}

// Generation bases and load-level series from the trajectories file.
void apply_trajectories(const json& t, const ScenarioConfig& config, demand::ScenarioSpec& spec) {
  try {
    spec.base_year = t.value("base_year", 2024);
    for (const auto& [key, value] : t.at("generation_base_gw").items()) {
      spec.generation_base_gw[parse_class(key)] = value.get<double>();
    }

    const json& dc = t.at("datacenter");
    const int ref_year = dc.value("ref_year", 2025);
    const YearSeries ramp = demand::reconstruct_datacenter_load(dc.at("ref_load_gw").get<double>(), ref_year,
                                                               dc.value("start_year", 2006));
    YearSeries load = ramp;
    const YearSeries tail = case_series(dc.at("cases"), config.datacenter_case, "datacenter", ref_year + 1,
                                        config.last_year);
    for (int y = ref_year + 1; y <= config.last_year; ++y) load.set(y, tail.at(y));
    spec.datacenter_load_gw = load;

    const json& ev = t.at("ev");
    demand::EvCalibration cal;
    cal.start_year = ev.value("start_year", 2011);
    cal.anchor_year = ev.value("anchor_year", 2024);
    cal.initial_fraction = ev.value("initial_fraction", 1e-3);
    if (ev.contains("initial_value")) cal.initial_value = ev.at("initial_value").get<double>();
    YearSeries stock = demand::reconstruct_ev_stock(ev.at("observed_gw").get<double>(), cal);
    const YearSeries ev_tail = case_series(ev.at("cases"), config.ev_case, "ev", cal.anchor_year + 1,
                                           config.last_year);
    for (int y = cal.anchor_year + 1; y <= config.last_year; ++y) stock.set(y, ev_tail.at(y));
    spec.ev_stock_gw = stock;
  } catch (const json::exception& e) {
    throw InputError(std::string("trajectories: ") + e.what());
  }
}

std::string hex(const unsigned char* data, unsigned int n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

std::string sha256_text(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(text.data(), text.size(), md, &n, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  return hex(md, n);
}

std::string gva(double v) { return csv::format_fixed(v, 3); }
std::string ratio(double v) { return csv::format_fixed(v, 4); }

bool material_used(const bom::BomMatrix& b, Material m) {
  for (auto e : all_classes()) {
    if (b.at(m, e) > 0.0) return true;
  }
  return false;
}

json parameters_snapshot(const ScenarioResult& r) {
  const auto& c = r.config;
  json p;
  for (const auto& profile : r.lifetimes) {
    const std::string key(name(profile.equipment_class));
    p["lifetimes"][key]["optimistic"] = {{"alpha", profile.optimistic.alpha}, {"beta", profile.optimistic.beta}};
    p["lifetimes"][key]["pessimistic"] = {{"alpha", profile.pessimistic.alpha}, {"beta", profile.pessimistic.beta}};
  }
  p["lifetime_case"] = survival::name(c.lifetime_case);
  for (auto e : all_classes()) p["ratios"][std::string(name(e))] = r.ratios[index(e)];
  for (auto m : all_materials()) {
    for (auto e : all_classes()) {
      const double v = r.bom.at(m, e);
      if (v > 0.0) p["bom_kg_per_mva"][std::string(name(m))][std::string(name(e))] = v;
    }
  }
  p["phi"] = c.phi;
  p["neumann"] = {{"tol", c.neumann.tol}, {"max_layers", c.neumann.max_layers}, {"layers_used", r.neumann_layers},
                  {"spectral_radius", r.spectral_radius}};
  p["weights"] = {{"grid", c.weights.grid}, {"generation", c.weights.generation},
                  {"consumption", c.weights.consumption}};
  p["trade_disruption"] = {{"enabled", c.trade.enabled},
                           {"cut", c.trade.cut},
                           {"restricted_regions", std::vector<std::string>(c.trade.restricted_regions.begin(),
                                                                           c.trade.restricted_regions.end())}};
  p["dtr"] = {{"enabled", c.dtr_enabled}, {"reduction", demand::kDtrReduction}};
  p["demand_growth_rate"] = c.demand_growth_rate;
  p["solver"] = {{"mode", c.solver.mode == allocator::LexMode::big_m ? "big_m" : "two_phase"},
                 {"big_m", c.solver.big_m},
                 {"lex_tolerance", c.solver.lex_tolerance},
                 {"tie_break", c.solver.tie_break},
                 {"max_duality_gap", c.solver.max_duality_gap}};
  return p;
}

}  // namespace

ScenarioConfig config_from_json(const json& j, const fs::path& base_dir) {
  ScenarioConfig c;
  c.raw = j;
  Fields top(j, "config");
  c.name = top.string("name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("config: scenario name must be a non-empty file-name-safe string");
  }
  c.first_year = top.integer_or("first_year", 2025);
  c.last_year = top.integer_or("last_year", 2030);
  if (c.last_year < c.first_year) throw ConfigError("config: last_year precedes first_year");
  c.demand_growth_rate = top.number("demand_growth_rate");
  try {
    c.lifetime_case = survival::parse_lifetime_case(top.string_or("lifetime_case", "optimistic"));
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.dtr_enabled = top.boolean_or("dtr_enabled", false);
  c.datacenter_case = top.string("datacenter_case");
  c.ev_case = top.string("ev_case");

  if (const json* t = top.find("trade_disruption")) {
    Fields f(*t, "config.trade_disruption");
    c.trade.enabled = f.boolean_or("enabled", false);
    const auto regions = f.strings_or("restricted_regions", {});
    c.trade.restricted_regions = {regions.begin(), regions.end()};
    c.trade.cut = f.number_or("cut", 0.7);
    f.finish();
    if (!(c.trade.cut >= 0.0 && c.trade.cut <= 1.0)) throw ConfigError("config.trade_disruption: cut must lie in [0, 1]");
    if (c.trade.enabled && c.trade.restricted_regions.empty()) {
      throw ConfigError("config.trade_disruption: enabled without restricted_regions");
    }
  }

  {
    Fields in(top.at("inputs"), "config.inputs");
    auto optional_path = [&](const char* key) -> std::optional<fs::path> {
      if (const json* v = in.find(key)) {
        if (!v->is_string()) throw ConfigError("config.inputs: '" + std::string(key) + "' must be a string");
        return resolve(base_dir, v->get<std::string>());
      }
      return std::nullopt;
    };
    c.lifetimes = optional_path("lifetimes");
    c.bom = optional_path("bom");
    c.ratios = optional_path("ratios");
    c.history = resolve(base_dir, in.string("history"));
    c.trajectories = resolve(base_dir, in.string("trajectories"));
    c.availability = resolve(base_dir, in.string("availability"));

    Fields m(in.at("mrsut"), "config.inputs.mrsut");
    c.mrsut.axes = resolve(base_dir, m.string("axes"));
    c.mrsut.use = resolve(base_dir, m.string("use"));
    c.mrsut.supply = resolve(base_dir, m.string("supply"));
    c.mrsut.concordance = resolve(base_dir, m.string("concordance"));
    c.mrsut.mass_factors = resolve(base_dir, m.string("mass_factors"));
    c.mrsut.final_demand = resolve(base_dir, m.string("final_demand"));
    c.mrsut.parent_products = m.strings_or("parent_products", {});
    if (c.mrsut.parent_products.empty()) throw ConfigError("config.inputs.mrsut: parent_products must not be empty");
    m.finish();
    in.finish();
  }

  c.phi = top.number_or("phi", mrsut::kDefaultAllocationFactor);
  if (!(c.phi > 0.0 && c.phi <= 1.0)) throw ConfigError("config: phi must lie in (0, 1]");

  if (const json* n = top.find("neumann")) {
    Fields f(*n, "config.neumann");
    c.neumann.tol = f.number_or("tol", c.neumann.tol);
    c.neumann.max_layers = f.integer_or("max_layers", c.neumann.max_layers);
    f.finish();
    if (!(c.neumann.tol >= 0.0) || c.neumann.max_layers < 0) throw ConfigError("config.neumann: invalid tol or max_layers");
  }
  if (const json* w = top.find("weights")) {
    Fields f(*w, "config.weights");
    c.weights.grid = f.number_or("grid", c.weights.grid);
    c.weights.generation = f.number_or("generation", c.weights.generation);
    c.weights.consumption = f.number_or("consumption", c.weights.consumption);
    f.finish();
    if (!(c.weights.grid > c.weights.generation && c.weights.generation > c.weights.consumption &&
          c.weights.consumption > 0.0)) {
      throw ConfigError("config.weights: need grid > generation > consumption > 0");
    }
  }
  if (const json* s = top.find("solver")) {
    Fields f(*s, "config.solver");
    const auto mode = f.string_or("mode", "two_phase");
    if (mode == "two_phase") c.solver.mode = allocator::LexMode::two_phase;
    else if (mode == "big_m") c.solver.mode = allocator::LexMode::big_m;
    else throw ConfigError("config.solver: mode must be two_phase or big_m");
    c.solver.big_m = f.number_or("big_m", c.solver.big_m);
    c.solver.lex_tolerance = f.number_or("lex_tolerance", c.solver.lex_tolerance);
    f.finish();
    if (!(c.solver.big_m > 0.0) || !(c.solver.lex_tolerance >= 0.0 && c.solver.lex_tolerance < 1.0)) {
      throw ConfigError("config.solver: invalid big_m or lex_tolerance");
    }
  }
  top.finish();

  if (!(c.demand_growth_rate >= 0.0 && c.demand_growth_rate <= 0.2)) {
    throw ConfigError("config: demand_growth_rate must lie in [0, 0.2]");
  }
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  const json j = read_json(path, true);
  auto c = config_from_json(j, fs::absolute(path).parent_path());
  c.source = fs::absolute(path);
  return c;
}

void set_verbose(bool on) { log().set_level(on ? spdlog::level::info : spdlog::level::warn); }

demand::RatioTable read_ratios_csv(const fs::path& path) {
  const auto table = csv::read_file(path);
  auto out = demand::default_ratios();
  std::set<EquipmentClass> seen;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto e = parse_class(table.cell(r, "equipment_class"));
    const double v = table.number(r, "ratio");
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("capacity ratio for " + std::string(name(e)) + " must be positive");
    if (!seen.insert(e).second) throw InputError("duplicate ratio for " + std::string(name(e)));
    out[index(e)] = v;
  }
  return out;
}

std::map<int, MaterialArray<double>> read_availability_csv(const fs::path& path) {
  const auto table = csv::read_file(path);
  std::map<int, MaterialArray<double>> out;
  std::set<std::pair<Material, int>> seen;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto m = parse_material(table.cell(r, "material"));
    const int y = table.integer(r, "year");
    const double v = table.number(r, "available_kg");
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("availability must be finite and nonnegative");
    if (!seen.emplace(m, y).second) {
      throw InputError("duplicate availability for " + std::string(name(m)) + " in " + std::to_string(y));
    }
    out[y][index(m)] = v;
  }
  return out;
}

SourcingTrace trace_sourcing(const MrsutInputs& in, double phi, const mrsut::NeumannOptions& neumann) {
  const auto system = mrsut::load_system(in.axes, in.use, in.supply);
  const auto& axes = system.axes();
  const auto b = mrsut::normalize_use(system.use(), system.industry_output());
  const auto c = mrsut::market_shares(system.supply(), system.product_output());
  const auto a = mrsut::ita_coefficients(b, c);

  SourcingTrace out;
  out.layers = mrsut::neumann_layers(a, neumann);

  std::vector<std::size_t> parents;
  for (const auto& p : in.parent_products) {
    const auto idx = axes.product_indices(p);
    if (idx.empty()) throw ConcordanceError("parent product '" + p + "' is not on the product axis");
    parents.insert(parents.end(), idx.begin(), idx.end());
  }

  const auto concordance = mrsut::read_concordance(in.concordance);
  const auto factors = mrsut::read_mass_factors(in.mass_factors);

  const auto table = csv::read_file(in.final_demand);
  std::map<int, mrsut::Vector> demand;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const int y = table.integer(r, "year");
    const auto label = table.cell(r, "product");
    const auto i = axes.find_product(label);
    if (!i) throw InputError("final demand: unknown product '" + label + "'");
    auto [it, inserted] = demand.try_emplace(y, mrsut::Vector::Zero(static_cast<Eigen::Index>(axes.product_count())));
    (void)inserted;
    const double v = table.number(r, "value");
    if (!(v >= 0.0)) throw InputError("final demand must be nonnegative");
    it->second[static_cast<Eigen::Index>(*i)] += v;
  }
  if (demand.empty()) throw InputError("final demand file has no rows");
  for (const auto& [year, f] : demand) {
    const auto scaled = mrsut::gse_final_demand(f, parents, phi);
    out.observed.push_back(mrsut::trace_material_sourcing(system, out.layers, scaled, concordance, factors, year));
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  ScenarioResult r;
  r.config = config;
  const std::string& sc = config.name;

  {
    Stage stage("load_parameters", sc);
    r.lifetimes = survival::default_lifetimes();
    if (config.lifetimes) {
      std::ifstream in(*config.lifetimes, std::ios::binary);
      if (!in) throw InputError("cannot open " + config.lifetimes->string());
      r.lifetimes = survival::read_lifetimes_csv(in);
      r.inputs["lifetimes"] = *config.lifetimes;
    }
    r.bom = config.bom ? bom::read_csv(*config.bom) : bom::default_bom();
    if (config.bom) r.inputs["bom"] = *config.bom;
    r.ratios = config.ratios ? read_ratios_csv(*config.ratios) : demand::default_ratios();
    if (config.ratios) r.inputs["ratios"] = *config.ratios;
  }

  {
    Stage stage("demand", sc);
    demand::ScenarioSpec spec;
    spec.name = config.name;
    spec.demand_growth_rate = config.demand_growth_rate;
    spec.first_year = config.first_year;
    spec.last_year = config.last_year;
    spec.lifetime_case = config.lifetime_case;
    spec.dtr_enabled = config.dtr_enabled;
    spec.trade_disruption_enabled = config.trade.enabled;
    apply_trajectories(read_json(config.trajectories, false), config, spec);
    r.inputs["trajectories"] = config.trajectories;
    const auto history = survival::read_net_additions_csv(config.history);
    r.inputs["history"] = config.history;
    r.schedule = demand::project_demand(spec, history, r.lifetimes, r.ratios);
  }

  std::map<int, MaterialArray<double>> availability;
  {
    Stage stage("sourcing", sc);
    const auto trace = trace_sourcing(config.mrsut, config.phi, config.neumann);
    r.neumann_layers = trace.layers.layers;
    r.spectral_radius = trace.layers.spectral.radius;
    for (const auto& [role, p] : std::map<std::string, fs::path>{{"mrsut_axes", config.mrsut.axes},
                                                                 {"mrsut_use", config.mrsut.use},
                                                                 {"mrsut_supply", config.mrsut.supply},
                                                                 {"mrsut_concordance", config.mrsut.concordance},
                                                                 {"mrsut_mass_factors", config.mrsut.mass_factors},
                                                                 {"mrsut_final_demand", config.mrsut.final_demand}}) {
      r.inputs[role] = p;
    }
    const auto regions = trace.observed.front().regions;
    for (const auto& region : config.trade.restricted_regions) {
      if (std::find(regions.begin(), regions.end(), region) == regions.end()) {
        throw ConfigError("trade_disruption: unknown region '" + region + "'");
      }
    }

    const auto global = read_availability_csv(config.availability);
    r.inputs["availability"] = config.availability;
    for (int y = config.first_year; y <= config.last_year; ++y) {
      auto it = global.find(y);
      if (it == global.end()) throw InputError("availability has no rows for " + std::to_string(y));
      const auto shares = mrsut::extrapolate_shares(trace.observed, y);
      mrsut::MaterialSourcing s;
      s.year = y;
      s.regions = regions;
      for (auto m : all_materials()) {
        s.mass_kg[index(m)].assign(regions.size(), 0.0);
        if (!material_used(r.bom, m)) continue;
        const auto& sh = shares[index(m)];
        double share_sum = 0.0;
        for (double v : sh) share_sum += v;
        if (!(share_sum > 0.0)) {
          throw ConcordanceError("no traced supply for material '" + std::string(name(m)) +
                                 "'; map it in the concordance");
        }
        for (std::size_t k = 0; k < regions.size(); ++k) s.mass_kg[index(m)][k] = it->second[index(m)] * sh[k];
      }
      if (config.trade.enabled) s = mrsut::apply_trade_disruption(s, config.trade.restricted_regions, config.trade.cut);
      MaterialArray<double> total{};
      for (auto m : all_materials()) total[index(m)] = s.total(m);
      availability[y] = total;
      r.sourcing.push_back(std::move(s));
    }
  }

  {
    Stage stage("allocation", sc);
    for (int y = config.first_year; y <= config.last_year; ++y) {
      allocator::AllocationProblem p;
      p.year = y;
      p.availability_kg = availability.at(y);
      p.demand_gva = r.schedule.totals(y);
      p.bom = r.bom;
      p.ratios = r.ratios;
      p.weights = allocator::class_weights(config.weights);
      r.problems.push_back(p);
    }
    r.solutions = allocator::solve_horizon(r.problems, config.solver);
    for (std::size_t i = 0; i < r.problems.size(); ++i) r.usage.push_back(allocator::usage_ratios(r.solutions[i], r.problems[i]));
    r.gaps = allocator::gap_report(r.solutions, r.schedule);
  }
  return r;
}

Summary summarize(const ScenarioResult& r) {
  Summary s;
  s.scenario = r.config.name;
  for (auto e : all_classes()) s.classes.emplace_back(name(e));
  for (std::size_t i = 0; i < r.solutions.size(); ++i) {
    const auto& sol = r.solutions[i];
    YearMetrics m;
    m.year = sol.year;
    for (auto e : all_classes()) m.demand_gva += r.problems[i].demand_gva[index(e)];
    m.produced_gva = sol.total_produced();
    m.unmet_gva = sol.total_unmet();
    m.gap_ratio = m.demand_gva > 0.0 ? m.unmet_gva / m.demand_gva : 0.0;
    m.transformer_unmet_gva = sol.unmet_gva[index(EquipmentClass::transformer)];
    m.other_unmet_gva = m.unmet_gva - m.transformer_unmet_gva;
    m.bundle_level = sol.bundle_level;
    for (auto mat : all_materials()) m.usage_ratio[index(mat)] = r.usage[i][index(mat)].ratio;
    s.years.push_back(m);
  }
  return s;
}

json to_json(const Summary& s) {
  json j;
  j["scenario"] = s.scenario;
  j["classes"] = s.classes;
  j["years"] = json::array();
  for (const auto& m : s.years) {
    json y;
    y["year"] = m.year;
    y["demand_gva"] = m.demand_gva;
    y["produced_gva"] = m.produced_gva;
    y["unmet_gva"] = m.unmet_gva;
    y["gap_ratio"] = m.gap_ratio;
    y["transformer_unmet_gva"] = m.transformer_unmet_gva;
    y["other_unmet_gva"] = m.other_unmet_gva;
    y["bundle_level"] = m.bundle_level;
    for (auto mat : all_materials()) y["usage_ratio"][std::string(name(mat))] = m.usage_ratio[index(mat)];
    j["years"].push_back(y);
  }
  return j;
}

Summary summary_from_json(const json& j) {
  try {
    Summary s;
    s.scenario = j.at("scenario").get<std::string>();
    s.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& y : j.at("years")) {
      YearMetrics m;
      m.year = y.at("year").get<int>();
      m.demand_gva = y.at("demand_gva").get<double>();
      m.produced_gva = y.at("produced_gva").get<double>();
      m.unmet_gva = y.at("unmet_gva").get<double>();
      m.gap_ratio = y.at("gap_ratio").get<double>();
      m.transformer_unmet_gva = y.at("transformer_unmet_gva").get<double>();
      m.other_unmet_gva = y.at("other_unmet_gva").get<double>();
      m.bundle_level = y.at("bundle_level").get<double>();
      for (auto mat : all_materials()) m.usage_ratio[index(mat)] = y.at("usage_ratio").at(std::string(name(mat))).get<double>();
      s.years.push_back(m);
    }
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("summary: ") + e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md, &n) != 1) throw Error("SHA-256 final failed");
  return hex(md, n);
}

json write_outputs(const ScenarioResult& r, const fs::path& out_dir) {
  Stage stage("write_outputs", r.config.name);
  fs::create_directories(out_dir);
  const fs::path manifest_path = out_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const json old = read_json(manifest_path, true);
    if (old.value("scenario", std::string()) != r.config.name) {
      throw ConfigError(out_dir.string() + " already holds outputs of scenario '" + old.value("scenario", std::string()) +
                        "'");
    }
  }

  std::map<std::string, std::string> files;
  {
    std::ostringstream os;
    demand::write_schedule_csv(os, r.schedule);
    files["demand_schedule.csv"] = os.str();
  }
  {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"class", "year", "produced_gva", "unmet_gva", "gap_ratio"});
    for (const auto& row : r.gaps.classes) {
      w.row({row.label, std::to_string(row.year), gva(row.produced_gva), gva(row.unmet_gva), ratio(row.gap_ratio)});
    }
    files["gap_report.csv"] = os.str();
  }
  {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"group", "year", "demand_gva", "produced_gva", "unmet_gva", "gap_ratio"});
    for (const auto* rows : {&r.gaps.groups, &r.gaps.aggregate}) {
      for (const auto& row : *rows) {
        w.row({row.label, std::to_string(row.year), gva(row.demand_gva), gva(row.produced_gva), gva(row.unmet_gva),
               ratio(row.gap_ratio)});
      }
    }
    files["gap_groups.csv"] = os.str();
  }
  {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"material", "year", "usage_ratio", "binding"});
    for (auto m : all_materials()) {
      for (std::size_t i = 0; i < r.usage.size(); ++i) {
        const auto& u = r.usage[i][index(m)];
        w.row({std::string(name(m)), std::to_string(r.problems[i].year), ratio(u.ratio), u.binding ? "true" : "false"});
      }
    }
    files["usage_ratios.csv"] = os.str();
  }
  {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"material", "year", "consumed_kg", "available_kg", "usage_ratio", "bottleneck"});
    for (auto m : all_materials()) {
      for (std::size_t i = 0; i < r.usage.size(); ++i) {
        const auto& u = r.usage[i][index(m)];
        w.row({std::string(name(m)), std::to_string(r.problems[i].year), gva(u.consumed_kg), gva(u.available_kg),
               ratio(u.ratio), u.bottleneck ? "true" : "false"});
      }
    }
    files["material_balance.csv"] = os.str();
  }
  {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"material", "year", "region", "available_kg", "share"});
    for (auto m : all_materials()) {
      for (const auto& s : r.sourcing) {
        if (!(s.total(m) > 0.0)) continue;
        const auto shares = s.shares(m);
        for (std::size_t k = 0; k < s.regions.size(); ++k) {
          w.row({std::string(name(m)), std::to_string(s.year), s.regions[k], gva(s.mass_kg[index(m)][k]), ratio(shares[k])});
        }
      }
    }
    files["sourcing_shares.csv"] = os.str();
  }
  files["summary.json"] = to_json(summarize(r)).dump(2) + "\n";

  json manifest;
  manifest["manifest_version"] = kManifestVersion;
  manifest["tool"] = "gse";
  manifest["version"] = kToolVersion;
  manifest["scenario"] = r.config.name;
  manifest["config"] = r.config.raw;
  manifest["base_dir"] = r.config.source.empty() ? fs::current_path().string() : r.config.source.parent_path().string();
  if (!r.config.source.empty()) manifest["config_path"] = r.config.source.string();
  for (const auto& [role, path] : r.inputs) {
    manifest["inputs"][role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
  manifest["parameters"] = parameters_snapshot(r);
  manifest["output_dir"] = out_dir.string();
  for (const auto& [file, text] : files) {
    write_text(out_dir / file, text);
    manifest["outputs"][file] = sha256_text(text);
  }
  write_text(manifest_path, manifest.dump(2) + "\n");
  return manifest;
}

ScenarioConfig config_from_manifest(const fs::path& manifest_path) {
  const json m = read_json(manifest_path, true);
  if (!m.contains("manifest_version") || !m.contains("config") || !m.contains("base_dir")) {
    throw ConfigError(manifest_path.string() + " is not a run manifest");
  }
  auto c = config_from_json(m.at("config"), fs::path(m.at("base_dir").get<std::string>()));
  if (m.contains("config_path")) c.source = m.at("config_path").get<std::string>();
  if (m.contains("inputs")) {
    for (const auto& [role, entry] : m.at("inputs").items()) {
      const fs::path p = entry.at("path").get<std::string>();
      const auto expected = entry.at("sha256").get<std::string>();
      if (sha256_file(p) != expected) {
        throw InputError("input '" + role + "' (" + p.string() + ") changed since the manifest was written");
      }
    }
  }
  return c;
}

void write_allocation_problems(const ScenarioResult& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& p : r.problems) {
    write_text(out_dir / ("allocation_" + std::to_string(p.year) + ".json"), allocator::to_json(p).dump(2) + "\n");
  }
}

std::vector<DeltaRow> compare(const Summary& ref, const Summary& var) {
  if (ref.classes != var.classes) throw InputError("scenarios cover different equipment classes");
  if (ref.years.size() != var.years.size()) throw InputError("scenarios cover different years");
  std::vector<DeltaRow> rows;
  for (std::size_t i = 0; i < ref.years.size(); ++i) {
    const auto& a = ref.years[i];
    const auto& b = var.years[i];
    if (a.year != b.year) throw InputError("scenarios cover different years");
    auto add = [&](std::string metric, double x, double y) { rows.push_back({a.year, std::move(metric), x, y, y - x}); };
    add("total_unmet_gva", a.unmet_gva, b.unmet_gva);
    add("total_gap_pct", 100.0 * a.gap_ratio, 100.0 * b.gap_ratio);
    add("transformer_unmet_gva", a.transformer_unmet_gva, b.transformer_unmet_gva);
    add("other_unmet_gva", a.other_unmet_gva, b.other_unmet_gva);
    for (auto m : all_materials()) {
      add("usage_ratio:" + std::string(name(m)), a.usage_ratio[index(m)], b.usage_ratio[index(m)]);
    }
  }
  return rows;
}

void write_delta_csv(std::ostream& out, const std::vector<DeltaRow>& rows) {
  csv::Writer w(out);
  w.row({"year", "metric", "reference", "variant", "delta"});
  for (const auto& r : rows) {
    const int decimals = r.metric.ends_with("_gva") ? 3 : 4;
    w.row({std::to_string(r.year), r.metric, csv::format_fixed(r.reference, decimals),
           csv::format_fixed(r.variant, decimals), csv::format_fixed(r.delta, decimals)});
  }
}

Summary load_summary(const fs::path& dir_or_manifest) {
  const fs::path dir = fs::is_directory(dir_or_manifest) ? dir_or_manifest : dir_or_manifest.parent_path();
  const fs::path summary_path = dir / "summary.json";
  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const json m = read_json(manifest_path, false);
    if (m.contains("outputs") && m.at("outputs").contains("summary.json")) {
      if (sha256_file(summary_path) != m.at("outputs").at("summary.json").get<std::string>()) {
        throw InputError(summary_path.string() + " does not match its manifest");
      }
    }
  }
  return summary_from_json(read_json(summary_path, false));
}

}  // namespace gse::scenario
