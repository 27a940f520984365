#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "gse/allocator.hpp"
#include "gse/bom.hpp"
#include "gse/csv.hpp"
#include "gse/error.hpp"
#include "gse/scenario.hpp"
#include "gse/survival.hpp"

namespace fs = std::filesystem;
using namespace gse;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kSolver = 4 };

survival::LifetimeTable lifetimes_from(const std::string& path) {
  if (path.empty()) return survival::default_lifetimes();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return survival::read_lifetimes_csv(in);
}

bom::BomMatrix bom_from(const std::string& path) { return path.empty() ? bom::default_bom() : bom::read_csv(path); }

void dump_lifetimes(const std::string& path) {
  const auto table = lifetimes_from(path);
  csv::Writer w(std::cout);
  w.row({"class", "scenario", "alpha", "beta", "t25", "t50", "t75"});
  for (const auto& profile : table) {
    for (auto c : {survival::LifetimeCase::optimistic, survival::LifetimeCase::pessimistic}) {
      const auto& p = profile.for_case(c);
      const auto q = survival::lifetime_quantiles(p);
      w.row({std::string(name(profile.equipment_class)), std::string(survival::name(c)), csv::format_roundtrip(p.alpha),
             csv::format_roundtrip(p.beta), csv::format_fixed(q.t25, 3), csv::format_fixed(q.t50, 3),
             csv::format_fixed(q.t75, 3)});
    }
  }
}

void dump_bom(const std::string& path, bool ranking) {
  const auto b = bom_from(path);
  if (!ranking) {
    bom::write_csv(std::cout, b);
    return;
  }
  csv::Writer w(std::cout);
  w.row({"class", "rank", "material", "kg_per_mva", "class_total_kg_per_mva"});
  for (const auto& c : bom::intensity_ranking(b)) {
    int rank = 1;
    for (const auto& [m, v] : c.materials) {
      w.row({std::string(name(c.equipment_class)), std::to_string(rank++), std::string(name(m)),
             csv::format_roundtrip(v), csv::format_roundtrip(c.total)});
    }
  }
}

scenario::ScenarioConfig config_for(const std::string& scenario_path, const std::string& manifest_path) {
  if (!manifest_path.empty()) return scenario::config_from_manifest(manifest_path);
  if (scenario_path.empty()) throw ConfigError("either --scenario or --manifest is required");
  return scenario::load_config(scenario_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-supporting equipment deployment under material constraints"};
  app.set_version_flag("--version", scenario::kToolVersion);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log one line per pipeline stage");
  std::optional<std::string> top_lifetimes;
  std::optional<std::string> top_bom;
  app.add_option("--dump-lifetimes", top_lifetimes, "print lifetime parameters (optional override CSV) and exit")
      ->expected(0, 1);
  app.add_option("--dump-bom", top_bom, "print the bill of materials (optional override CSV) and exit")->expected(0, 1);

  auto* run = app.add_subcommand("run", "run a scenario end to end");
  std::string scenario_path, manifest_path, out_root = "results", dump_lp_dir;
  run->add_option("--scenario", scenario_path, "scenario config JSON");
  run->add_option("--manifest", manifest_path, "rerun from a manifest written by an earlier run");
  run->add_option("--out", out_root, "output root; files go to <out>/<scenario name>");
  run->add_option("--dump-lp", dump_lp_dir, "also write each year's allocation problem as JSON");

  auto* cmp = app.add_subcommand("compare", "delta table of a variant run against a reference run");
  std::string ref_path, var_path, cmp_out;
  std::optional<int> cmp_year;
  cmp->add_option("reference", ref_path, "reference output directory or manifest")->required();
  cmp->add_option("variant", var_path, "variant output directory or manifest")->required();
  cmp->add_option("--year", cmp_year, "restrict to one year");
  cmp->add_option("--out", cmp_out, "write CSV here instead of stdout");

  auto* trace = app.add_subcommand("trace", "regional material sourcing from the supply-use tables");
  std::string trace_scenario;
  std::optional<int> layers;
  std::optional<double> tol, phi;
  trace->add_option("--scenario", trace_scenario, "scenario config naming the supply-use inputs")->required();
  trace->add_option("--layers", layers, "maximum number of Neumann layers");
  trace->add_option("--tol", tol, "stop once a layer's max-norm falls below this");
  trace->add_option("--phi", phi, "allocation factor applied to the parent products");

  auto* lt = app.add_subcommand("dump-lifetimes", "print lifetime parameters and quantiles");
  std::string lt_path;
  lt->add_option("--lifetimes", lt_path, "override CSV class,scenario,alpha,beta");

  auto* bm = app.add_subcommand("dump-bom", "print the bill of materials");
  std::string bm_path;
  bool ranking = false;
  bm->add_option("--bom", bm_path, "override CSV material,equipment_class,kg_per_mva");
  bm->add_flag("--ranking", ranking, "per-class materials by descending intensity");

  auto* lp = app.add_subcommand("dump-lp", "write or replay allocation problems");
  std::string lp_scenario, lp_out, replay;
  bool replay_big_m = false;
  lp->add_option("--scenario", lp_scenario, "scenario config");
  lp->add_option("--out", lp_out, "directory for allocation_<year>.json");
  lp->add_option("--replay", replay, "solve a dumped problem and print the allocation");
  lp->add_flag("--big-m", replay_big_m, "replay with the single big-M objective");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  scenario::set_verbose(verbose);

  try {
    if (top_lifetimes) {
      dump_lifetimes(*top_lifetimes);
      return kOk;
    }
    if (top_bom) {
      dump_bom(*top_bom, false);
      return kOk;
    }

    if (*run) {
      const auto config = config_for(scenario_path, manifest_path);
      const auto result = scenario::run_scenario(config);
      const fs::path out_dir = fs::path(out_root) / config.name;
      scenario::write_outputs(result, out_dir);
      if (!dump_lp_dir.empty()) scenario::write_allocation_problems(result, dump_lp_dir);
      std::cout << out_dir.string() << "\n";
      return kOk;
    }
    if (*cmp) {
      auto rows = scenario::compare(scenario::load_summary(ref_path), scenario::load_summary(var_path));
      if (cmp_year) std::erase_if(rows, [&](const scenario::DeltaRow& r) { return r.year != *cmp_year; });
      if (cmp_out.empty()) {
        scenario::write_delta_csv(std::cout, rows);
      } else {
        std::ofstream out(cmp_out, std::ios::binary);
        if (!out) throw InputError("cannot write " + cmp_out);
        scenario::write_delta_csv(out, rows);
      }
      return kOk;
    }
    if (*trace) {
      const auto config = scenario::load_config(trace_scenario);
      auto neumann = config.neumann;
      if (layers) neumann.max_layers = *layers;
      if (tol) neumann.tol = *tol;
      const auto t = scenario::trace_sourcing(config.mrsut, phi.value_or(config.phi), neumann);
      std::cerr << "layers=" << t.layers.layers << " spectral_radius=" << t.layers.spectral.radius;
      if (t.layers.residual_bound) std::cerr << " residual_bound=" << *t.layers.residual_bound;
      std::cerr << "\n";
      csv::Writer w(std::cout);
      w.row({"material", "year", "region", "mass_kg", "share"});
      for (auto m : all_materials()) {
        for (const auto& s : t.observed) {
          if (!(s.total(m) > 0.0)) continue;
          const auto shares = s.shares(m);
          for (std::size_t k = 0; k < s.regions.size(); ++k) {
            w.row({std::string(name(m)), std::to_string(s.year), s.regions[k],
                   csv::format_fixed(s.mass_kg[index(m)][k], 3), csv::format_fixed(shares[k], 4)});
          }
        }
      }
      return kOk;
    }
    if (*lt) {
      dump_lifetimes(lt_path);
      return kOk;
    }
    if (*bm) {
      dump_bom(bm_path, ranking);
      return kOk;
    }
    if (*lp) {
      if (!replay.empty()) {
        std::ifstream in(replay, std::ios::binary);
        if (!in) throw InputError("cannot open " + replay);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw InputError(replay + ": " + e.what());
        }
        const auto problem = allocator::problem_from_json(j);
        allocator::SolveOptions opts;
        if (replay_big_m) opts.mode = allocator::LexMode::big_m;
        const auto sol = allocator::solve_year(problem, opts);
        csv::Writer w(std::cout);
        w.row({"class", "year", "produced_gva", "unmet_gva", "gap_ratio"});
        for (auto e : all_classes()) {
          const double d = problem.demand_gva[index(e)];
          const double u = sol.unmet_gva[index(e)];
          w.row({std::string(name(e)), std::to_string(sol.year), csv::format_fixed(sol.produced_gva[index(e)], 3),
                 csv::format_fixed(u, 3), csv::format_fixed(d > 0.0 ? u / d : 0.0, 4)});
        }
        return kOk;
      }
      if (lp_scenario.empty() || lp_out.empty()) throw ConfigError("dump-lp needs --scenario and --out, or --replay");
      const auto result = scenario::run_scenario(scenario::load_config(lp_scenario));
      scenario::write_allocation_problems(result, lp_out);
      return kOk;
    }
    std::cout << app.help();
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
