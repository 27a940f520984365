#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "gse/types.hpp"

namespace gse::survival {

// Weibull lifetime law: scale alpha in years, dimensionless shape beta.
struct WeibullParams {
  double alpha = 0.0;
  double beta = 0.0;

  // Throws DomainError unless both are positive and finite.
  void validate() const;
  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;
};

enum class LifetimeCase { optimistic, pessimistic };

std::string_view name(LifetimeCase c);
LifetimeCase parse_lifetime_case(std::string_view s);

struct LifetimeProfile {
  EquipmentClass equipment_class{};
  WeibullParams optimistic;
  WeibullParams pessimistic;

  const WeibullParams& for_case(LifetimeCase c) const {
    return c == LifetimeCase::optimistic ? optimistic : pessimistic;
  }
};

using LifetimeTable = ClassArray<LifetimeProfile>;

// Literature-derived lifetime windows, one entry per equipment class. The data
// center transformer entry aliases the transformer parameters.
const LifetimeTable& default_lifetimes();

// Cohort ages beyond this are treated as fully retired.
inline constexpr int kMaxAge = 200;

double cumulative_failure(double age, const WeibullParams& p);
double survival(double age, const WeibullParams& p);

// Probability of failing between ages (age-1, age]; zero at age 0 so a cohort
// never fails in its installation year.
double annual_failure_increment(int age, const WeibullParams& p);

struct LifetimeQuantiles {
  double t25 = 0.0;
  double t50 = 0.0;
  double t75 = 0.0;
};

// Age at which the cumulative failure probability reaches q, for q in (0, 1).
double lifetime_quantile(const WeibullParams& p, double q);
LifetimeQuantiles lifetime_quantiles(const WeibullParams& p);

// Ages on [0, t_max] (grid step `step`) where F_a - F_b changes sign, i.e.
// where the two CDFs cross. Empty when one CDF dominates on the whole grid.
std::vector<double> cdf_crossings(const WeibullParams& a, const WeibullParams& b,
                                  double t_max = 60.0, double step = 0.5);

// Age-structured stock-flow record of one equipment class.
//
// Net additions C(y) are converted into total installations TC(y) by adding the
// expected replacement of every earlier cohort:
//
//   TC(first) = C(first)
//   TC(y)     = C(y) + sum_{k<y} TC(k) * dF(y - k)
//
// Replacements are booked in the year the unit fails, and the convolution runs
// over TC so replacements of replacements are included.
class CohortLedger {
 public:
  CohortLedger(int start_year, std::vector<double> net_additions,
               std::vector<double> total_installations, WeibullParams params);

  int start_year() const { return start_year_; }
  int end_year() const { return start_year_ + static_cast<int>(net_additions_.size()) - 1; }
  const WeibullParams& params() const { return params_; }

  const std::vector<double>& net_additions() const { return net_additions_; }
  const std::vector<double>& total_installations() const { return total_installations_; }

  double net_addition(int year) const;
  double total_installation(int year) const;
  double replacement(int year) const { return total_installation(year) - net_addition(year); }

  // SC(cohort; observed) = TC(cohort) * S(observed - cohort).
  double cohort_surviving(int cohort_year, int observed_year) const;

 private:
  std::size_t offset(int year) const;

  int start_year_;
  std::vector<double> net_additions_;
  std::vector<double> total_installations_;
  WeibullParams params_;
};

// Throws InputError for empty or negative/non-finite additions.
CohortLedger build_cohort_ledger(int start_year, std::span<const double> net_additions,
                                 const WeibullParams& p);

// Total in-service capacity in `year`: sum over cohorts up to that year of
// TC(y) * S(year - y). Throws DomainError for years before the ledger starts.
double surviving_stock(const CohortLedger& ledger, int year);

// CSV `class,scenario,alpha,beta`, one row per class and lifetime case.
void write_lifetimes_csv(std::ostream& out, const LifetimeTable& table);
// Rows override the matching entries of `base`.
LifetimeTable read_lifetimes_csv(std::istream& in, const LifetimeTable& base = default_lifetimes());

// CSV `equipment_class,year,net_addition_gva`. Years missing inside a class's
// range are zero; duplicate (class, year) rows are rejected.
std::map<EquipmentClass, YearSeries> read_net_additions_csv(std::istream& in);
std::map<EquipmentClass, YearSeries> read_net_additions_csv(const std::filesystem::path& path);

}  // namespace gse::survival
