#include "gse/survival.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "gse/csv.hpp"
#include "gse/error.hpp"

namespace gse::survival {

void WeibullParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError("Weibull parameters must be positive and finite (alpha=" +
                      std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
  }
}

std::string_view name(LifetimeCase c) {
  return c == LifetimeCase::optimistic ? "optimistic" : "pessimistic";
}

LifetimeCase parse_lifetime_case(std::string_view s) {
  if (s == "optimistic") return LifetimeCase::optimistic;
  if (s == "pessimistic") return LifetimeCase::pessimistic;
  throw ConfigError("lifetime case must be 'optimistic' or 'pessimistic', got '" + std::string(s) +
                    "'");
}

const LifetimeTable& default_lifetimes() {
  static const LifetimeTable table = [] {
    using E = EquipmentClass;
    LifetimeTable t{};
    auto put = [&](E e, WeibullParams opt, WeibullParams pes) {
      t[index(e)] = LifetimeProfile{e, opt, pes};
    };
    const WeibullParams transformer_opt{49.5663, 4.6141};
    const WeibullParams transformer_pes{40.9500, 7.3410};
    put(E::transformer, transformer_opt, transformer_pes);
    put(E::dc_transformer, transformer_opt, transformer_pes);
    put(E::spv_inverter, {25.5900, 4.3500}, {16.2300, 4.2300});
    put(E::dfig_converter, {13.5000, 0.7000}, {13.5000, 0.6000});
    put(E::pmsg_converter, {30.3000, 0.9500}, {30.3000, 0.3400});
    put(E::dc_ups, {9.8100, 2.8500}, {9.8100, 2.8500});
    put(E::ev_charger_pcs, {18.7800, 5.0000}, {18.7800, 5.0000});
    put(E::battery_pcs, {38.4200, 5.8600}, {19.5600, 5.8300});
    return t;
  }();
  return table;
}

double cumulative_failure(double age, const WeibullParams& p) {
  p.validate();
  if (!(age >= 0.0)) throw DomainError("age must be nonnegative, got " + std::to_string(age));
  // -expm1 keeps full precision for small hazards.
  return -std::expm1(-std::pow(age / p.alpha, p.beta));
}

double survival(double age, const WeibullParams& p) {
  p.validate();
  if (!(age >= 0.0)) throw DomainError("age must be nonnegative, got " + std::to_string(age));
  return std::exp(-std::pow(age / p.alpha, p.beta));
}

double annual_failure_increment(int age, const WeibullParams& p) {
  if (age < 0) throw DomainError("age must be nonnegative, got " + std::to_string(age));
  if (age == 0) {
    p.validate();
    return 0.0;
  }
  return cumulative_failure(age, p) - cumulative_failure(age - 1, p);
}

double lifetime_quantile(const WeibullParams& p, double q) {
  p.validate();
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile must lie in (0, 1)");
  return p.alpha * std::pow(-std::log1p(-q), 1.0 / p.beta);
}

LifetimeQuantiles lifetime_quantiles(const WeibullParams& p) {
  return {lifetime_quantile(p, 0.25), lifetime_quantile(p, 0.5), lifetime_quantile(p, 0.75)};
}

std::vector<double> cdf_crossings(const WeibullParams& a, const WeibullParams& b, double t_max,
                                  double step) {
  if (!(step > 0.0) || !(t_max >= 0.0)) throw DomainError("invalid crossing grid");
  std::vector<double> out;
  int previous_sign = 0;
  const auto n = static_cast<int>(std::floor(t_max / step + 1e-9));
  for (int i = 0; i <= n; ++i) {
    double t = i * step;
    double d = cumulative_failure(t, a) - cumulative_failure(t, b);
    int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (previous_sign != 0 && sign != previous_sign) out.push_back(t);
      previous_sign = sign;
    }
  }
  return out;
}

CohortLedger::CohortLedger(int start_year, std::vector<double> net_additions,
                           std::vector<double> total_installations, WeibullParams params)
    : start_year_(start_year),
      net_additions_(std::move(net_additions)),
      total_installations_(std::move(total_installations)),
      params_(params) {}

std::size_t CohortLedger::offset(int year) const {
  if (year < start_year_ || year > end_year()) {
    throw DomainError("year " + std::to_string(year) + " outside ledger range [" +
                      std::to_string(start_year_) + ", " + std::to_string(end_year()) + "]");
  }
  return static_cast<std::size_t>(year - start_year_);
}

double CohortLedger::net_addition(int year) const { return net_additions_[offset(year)]; }

double CohortLedger::total_installation(int year) const {
  return total_installations_[offset(year)];
}

double CohortLedger::cohort_surviving(int cohort_year, int observed_year) const {
  if (observed_year < cohort_year) {
    throw DomainError("observation year precedes cohort year");
  }
  const int age = observed_year - cohort_year;
  if (age > kMaxAge) return 0.0;
  return total_installation(cohort_year) * survival(age, params_);
}

CohortLedger build_cohort_ledger(int start_year, std::span<const double> net_additions,
                                 const WeibullParams& p) {
  p.validate();
  if (net_additions.empty()) throw InputError("net-addition series is empty");
  for (double c : net_additions) {
    if (!std::isfinite(c) || c < 0.0) {
      throw InputError("net additions must be finite and nonnegative");
    }
  }

  const std::size_t n = net_additions.size();
  const std::size_t max_age = std::min<std::size_t>(n, kMaxAge);
  std::vector<double> increments(max_age + 1, 0.0);
  for (std::size_t age = 1; age <= max_age; ++age) {
    increments[age] = annual_failure_increment(static_cast<int>(age), p);
  }

  std::vector<double> total(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    double replacement = 0.0;
    const std::size_t oldest = y > max_age ? y - max_age : 0;
    for (std::size_t k = oldest; k < y; ++k) replacement += total[k] * increments[y - k];
    total[y] = net_additions[y] + replacement;
  }
  return CohortLedger(start_year, {net_additions.begin(), net_additions.end()}, std::move(total), p);
}

double surviving_stock(const CohortLedger& ledger, int year) {
  if (year < ledger.start_year()) {
    throw DomainError("year " + std::to_string(year) + " precedes ledger start " +
                      std::to_string(ledger.start_year()));
  }
  const int last = std::min(year, ledger.end_year());
  double stock = 0.0;
  for (int y = std::max(ledger.start_year(), year - kMaxAge); y <= last; ++y) {
    stock += ledger.cohort_surviving(y, year);
  }
  return stock;
}

void write_lifetimes_csv(std::ostream& out, const LifetimeTable& table) {
  csv::Writer w(out);
  w.row({"class", "scenario", "alpha", "beta"});
  for (const auto& profile : table) {
    for (auto c : {LifetimeCase::optimistic, LifetimeCase::pessimistic}) {
      const auto& p = profile.for_case(c);
      w.row({std::string(gse::name(profile.equipment_class)), std::string(name(c)), csv::format_roundtrip(p.alpha),
             csv::format_roundtrip(p.beta)});
    }
  }
}

LifetimeTable read_lifetimes_csv(std::istream& in, const LifetimeTable& base) {
  const auto table = csv::parse(in, "lifetimes");
  LifetimeTable out = base;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto e = parse_class(table.cell(r, "class"));
    const auto c = parse_lifetime_case(table.cell(r, "scenario"));
    WeibullParams p{table.number(r, "alpha"), table.number(r, "beta")};
    p.validate();
    auto& profile = out[index(e)];
    profile.equipment_class = e;
    (c == LifetimeCase::optimistic ? profile.optimistic : profile.pessimistic) = p;
  }
  return out;
}

std::map<EquipmentClass, YearSeries> read_net_additions_csv(std::istream& in) {
  const auto table = csv::parse(in, "net additions");
  std::map<EquipmentClass, YearSeries> out;
  std::set<std::pair<EquipmentClass, int>> seen;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto e = parse_class(table.cell(r, "equipment_class"));
    const int year = table.integer(r, "year");
    const double v = table.number(r, "net_addition_gva");
    if (v < 0.0) throw InputError("negative net addition for " + std::string(gse::name(e)));
    if (!seen.emplace(e, year).second) {
      throw InputError("duplicate net addition for " + std::string(gse::name(e)) + " in " + std::to_string(year));
    }
    out[e].set(year, v);
  }
  return out;
}

std::map<EquipmentClass, YearSeries> read_net_additions_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_net_additions_csv(in);
}

}  // namespace gse::survival
