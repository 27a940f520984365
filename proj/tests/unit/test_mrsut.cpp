#include <catch_amalgamated.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <random>

#include "gse/error.hpp"
#include "gse/mrsut.hpp"

using namespace gse;
using namespace gse::mrsut;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Matrix random_nonneg(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double zero_prob = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng) < zero_prob ? 0.0 : u(rng);
  return m;
}

// Random productive coefficient matrix whose rows sum to `row_sum`.
Matrix random_coefficients(std::mt19937_64& rng, Eigen::Index n, double row_sum) {
  Matrix a = random_nonneg(rng, n, n, 0.2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a.row(i).sum() == 0.0) a(i, i) = 1.0;
    a.row(i) *= row_sum / a.row(i).sum();
  }
  return a;
}

// Two regions, one product ("copper_goods") plus one other good, each made by
// a single industry; copper output of region A is 3x that of region B.
SupplyUseSystem two_region_copper() {
  Axes axes{{"A", "B"}, {"copper_goods", "machinery"}, {"mining", "manufacturing"}};
  Matrix v = Matrix::Zero(4, 4);
  v(0, 0) = 30.0;  // A copper by A mining
  v(1, 1) = 50.0;  // A machinery
  v(2, 2) = 10.0;  // B copper
  v(3, 3) = 40.0;  // B machinery
  Matrix u = Matrix::Zero(4, 4);
  // Machinery in both regions draws copper in proportion to regional copper output.
  u(0, 1) = 6.0;
  u(2, 1) = 2.0;
  u(0, 3) = 4.5;
  u(2, 3) = 1.5;
  return SupplyUseSystem::create(axes, u, v);
}

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "gse_mrsut_test";
  std::filesystem::create_directories(p);
  return p;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("normalized use") {
  const Vector g = (Vector(3) << 2.0, 5.0, 7.0).finished();
  const Matrix u = g.asDiagonal();
  CHECK(normalize_use(u, g).isApprox(Matrix::Identity(3, 3), 1e-15));

  Matrix u2(2, 2);
  u2 << 2, 1, 0, 3;
  const Vector g2 = (Vector(2) << 4, 2).finished();
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0, 1.5;
  CHECK((normalize_use(u2, g2) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("market shares") {
  Matrix v(1, 2);
  v << 3.0, 1.0;
  const Vector q = (Vector(1) << 4.0).finished();
  const Matrix c = market_shares(v, q);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 1);
  CHECK(c(0, 0) == 0.75);
  CHECK(c(1, 0) == 0.25);

  const Matrix diag = (Vector(3) << 1.0, 2.0, 3.0).finished().asDiagonal();
  CHECK(market_shares(diag, diag.rowwise().sum()).isApprox(Matrix::Identity(3, 3), 1e-15));
}

TEST_CASE("ITA coefficients") {
  std::mt19937_64 rng(51);
  const Matrix b = random_nonneg(rng, 4, 4);
  CHECK(ita_coefficients(b, Matrix::Identity(4, 4)) == b);
  CHECK(ita_coefficients(Matrix::Zero(4, 3), random_nonneg(rng, 3, 4)).isZero());

  Matrix b2(2, 2), c2(2, 2), expected(2, 2);
  b2 << 0.1, 0.2, 0.3, 0.0;
  c2 << 0.5, 1.0, 0.5, 0.0;
  expected << 0.15, 0.1, 0.15, 0.3;
  CHECK((ita_coefficients(b2, c2) - expected).cwiseAbs().maxCoeff() < 1e-16);
  CHECK_THROWS_AS(ita_coefficients(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), InputError);
}

TEST_CASE("zero output industries and products") {
  Matrix u = Matrix::Zero(2, 3);
  u(0, 0) = 1.0;
  const Vector g = (Vector(3) << 4.0, 0.0, 2.0).finished();
  DropReport report;
  const Matrix b = normalize_use(u, g, &report);
  CHECK(report.industries == std::vector<std::size_t>{1});
  CHECK(b.col(1).isZero());
  u(1, 1) = 0.5;
  CHECK_THROWS_AS(normalize_use(u, g), InconsistencyError);

  Matrix v = Matrix::Zero(2, 2);
  v(0, 0) = 3.0;
  DropReport pr;
  const Matrix c = market_shares(v, v.rowwise().sum(), &pr);
  CHECK(pr.products == std::vector<std::size_t>{1});
  CHECK(c.col(1).isZero());
  CHECK_THROWS_AS(market_shares(v, (Vector(2) << 0.0, 0.0).finished()), InconsistencyError);
}

TEST_CASE("property: reconstruction of U and V") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 40; ++trial) {
    Axes axes{{"R1", "R2"}, {"p1", "p2", "p3"}, {"i1", "i2"}};
    const Matrix v = random_nonneg(rng, 6, 4, 0.2) + Matrix::Identity(6, 4) * 0.1;
    const Matrix u = random_nonneg(rng, 6, 4) * 0.2;
    const auto sys = SupplyUseSystem::create(axes, u, v);
    const Matrix b = normalize_use(sys.use(), sys.industry_output());
    const Matrix c = market_shares(sys.supply(), sys.product_output());
    CHECK((b * sys.industry_output().asDiagonal().toDenseMatrix() - u).cwiseAbs().maxCoeff() <=
          1e-12 * u.cwiseAbs().maxCoeff());
    const Matrix v_back = (c * sys.product_output().asDiagonal().toDenseMatrix()).transpose();
    CHECK((v_back - v).cwiseAbs().maxCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff());
    for (Eigen::Index p = 0; p < c.cols(); ++p) CHECK_THAT(c.col(p).sum(), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("supply orientation is normalized") {
  std::mt19937_64 rng(53);
  Axes axes{{"R"}, {"a", "b", "c"}, {"x", "y"}};
  const Matrix v = random_nonneg(rng, 3, 2, 0.0);
  const Matrix u = random_nonneg(rng, 3, 2) * 0.1;
  const auto direct = SupplyUseSystem::create(axes, u, v);
  const auto flipped = SupplyUseSystem::create(axes, u, v.transpose());
  CHECK(direct.supply() == flipped.supply());

  // Square case: orientation decided by which axis sums to g.
  Axes sq{{"R"}, {"a", "b"}, {"x", "y"}};
  Matrix vs(2, 2);
  vs << 5, 1, 0, 3;
  const Vector g = vs.colwise().sum().transpose();
  const auto s1 = SupplyUseSystem::create(sq, Matrix::Zero(2, 2), vs.transpose(), g);
  CHECK(s1.supply() == vs);
  CHECK_THROWS_AS(SupplyUseSystem::create(sq, Matrix::Zero(2, 2), vs, (Vector(2) << 1.0, 1.0).finished()),
                  InconsistencyError);
  CHECK_THROWS_AS(SupplyUseSystem::create(sq, -Matrix::Identity(2, 2), vs), InputError);
}

TEST_CASE("spectral radius") {
  Matrix a(2, 2);
  a << 0.0, 0.5, 0.5, 0.0;  // periodic: plain power iteration would oscillate
  auto est = spectral_radius(a);
  CHECK(est.converged);
  CHECK_THAT(est.radius, WithinAbs(0.5, 1e-10));

  Matrix b(3, 3);
  b << 0.2, 0.1, 0.0, 0.05, 0.3, 0.1, 0.1, 0.0, 0.4;
  const double exact = b.eigenvalues().cwiseAbs().maxCoeff();
  est = spectral_radius(b);
  CHECK_THAT(est.radius, WithinAbs(exact, 1e-10));
  CHECK(est.lower <= exact + 1e-12);
  CHECK(est.upper >= exact - 1e-12);
}

TEST_CASE("Neumann series of a scalar") {
  Matrix a(1, 1);
  a << 0.5;
  auto three = neumann_layers(a, {.max_layers = 3, .tol = 0.0});
  CHECK(three.layers == 3);
  CHECK(three.total(0, 0) == 1.875);
  CHECK(*three.residual_bound == 0.125);
  CHECK(2.0 - three.total(0, 0) == *three.residual_bound);

  auto four = neumann_layers(a, {.max_layers = 4, .tol = 0.0});
  CHECK(four.total(0, 0) == 1.9375);
  CHECK(2.0 - four.total(0, 0) == 0.0625);
  CHECK(*four.residual_bound == 0.0625);
}

TEST_CASE("Neumann series of the zero matrix") {
  const auto l = neumann_layers(Matrix::Zero(4, 4));
  CHECK(l.total == Matrix::Identity(4, 4));
  CHECK(l.layers == 1);
  CHECK(l.terms.size() == 2);
}

TEST_CASE("Neumann series against the direct inverse") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_coefficients(rng, 5, 0.6);
    const Matrix direct = (Matrix::Identity(5, 5) - a).partialPivLu().solve(Matrix::Identity(5, 5));
    const auto fixed = neumann_layers(a, {.max_layers = 50, .tol = 0.0});
    CHECK(fixed.layers == 50);
    CHECK((fixed.total - direct).cwiseAbs().maxCoeff() < 1e-10);
    const auto adaptive = neumann_layers(a, {.tol = 1e-12});
    CHECK((adaptive.total - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(adaptive.layers < 200);
  }
}

TEST_CASE("property: Neumann partial sums increase and converge monotonically") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> rs(0.1, 0.9);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const Matrix a = random_coefficients(rng, n, rs(rng));
    const Matrix direct = (Matrix::Identity(n, n) - a).partialPivLu().solve(Matrix::Identity(n, n));
    const auto l = neumann_layers(a, {.max_layers = 60, .tol = 0.0});
    Matrix partial = Matrix::Zero(n, n);
    double previous_error = INFINITY;
    for (std::size_t k = 0; k < l.terms.size(); ++k) {
      const Matrix next = partial + l.terms[k];
      CHECK((next - partial).minCoeff() >= 0.0);
      partial = next;
      const double err = (partial - direct).cwiseAbs().maxCoeff();
      if (k >= static_cast<std::size_t>(n)) CHECK(err <= previous_error + 1e-15);
      previous_error = err;
    }
    CHECK(partial.isApprox(l.total, 1e-14));
    CHECK(l.residual_bound.has_value());
    CHECK((l.total - direct).cwiseAbs().maxCoeff() <= *l.residual_bound + 1e-14);
  }
}

TEST_CASE("non-productive systems are rejected") {
  Matrix a(2, 2);
  a << 0.6, 0.5, 0.4, 0.7;
  try {
    neumann_layers(a);
    FAIL("expected NonProductiveError");
  } catch (const NonProductiveError& e) {
    CHECK_THAT(e.spectral_radius(), WithinAbs(1.1, 1e-9));
  }
  Matrix unit(1, 1);
  unit << 1.0;
  CHECK_THROWS_AS(neumann_layers(unit), NonProductiveError);
}

TEST_CASE("residual bound is omitted when the row norm is not below one") {
  Matrix a(2, 2);
  a << 0.0, 1.5, 0.1, 0.0;  // spectral radius sqrt(0.15) < 1, row norm 1.5
  const auto l = neumann_layers(a);
  CHECK_FALSE(l.residual_bound.has_value());
  CHECK_THAT(l.spectral.radius, WithinAbs(std::sqrt(0.15), 1e-9));
}

TEST_CASE("allocation factor") {
  const Vector f = (Vector(3) << 100.0, 50.0, 8.0).finished();
  const std::vector<std::size_t> parent{0};
  const Vector scaled = gse_final_demand(f, parent);
  CHECK_THAT(scaled[0], WithinAbs(4.6, 1e-12));
  CHECK(scaled[1] == 50.0);
  CHECK(scaled[2] == 8.0);
  CHECK(gse_final_demand(f, parent, 1.0) == f);
  CHECK_THROWS_AS(gse_final_demand(f, parent, 0.0), ConfigError);
  CHECK_THROWS_AS(gse_final_demand(f, parent, 1.5), ConfigError);
}

TEST_CASE("sourcing on a single region") {
  Axes axes{{"only"}, {"ore", "kit"}, {"mine", "plant"}};
  Matrix v = Matrix::Identity(2, 2) * 10.0;
  Matrix u = Matrix::Zero(2, 2);
  u(0, 1) = 2.0;
  const auto sys = SupplyUseSystem::create(axes, u, v);
  const auto l = neumann_layers(ita_coefficients(normalize_use(u, sys.industry_output()),
                                                 market_shares(sys.supply(), sys.product_output())));
  const Vector f = (Vector(2) << 0.0, 5.0).finished();
  const Concordance conc{{"ore", Material::copper}, {"ore", Material::nickel}};
  const MassFactors mf{{Material::copper, 2.0}, {Material::nickel, 0.5}};
  const auto s = trace_material_sourcing(sys, l, f, conc, mf, 2025);
  CHECK(s.shares(Material::copper) == std::vector<double>{1.0});
  CHECK_THAT(s.total(Material::copper), WithinRel(5.0 * 0.2 * 2.0, 1e-12));
  CHECK_THAT(s.total(Material::nickel), WithinRel(5.0 * 0.2 * 0.5, 1e-12));
  CHECK(s.total(Material::steel) == 0.0);
}

TEST_CASE("two-region copper sourcing") {
  const auto sys = two_region_copper();
  const Matrix a = ita_coefficients(normalize_use(sys.use(), sys.industry_output()),
                                    market_shares(sys.supply(), sys.product_output()));
  const auto l = neumann_layers(a, {.tol = 1e-14});
  Vector f = Vector::Zero(4);
  f[1] = 10.0;
  f[3] = 7.0;
  const Concordance conc{{"copper_goods", Material::copper}};
  const MassFactors mf{{Material::copper, 1000.0}};
  const auto s = trace_material_sourcing(sys, l, f, conc, mf, 2024);
  const auto sh = s.shares(Material::copper);
  CHECK_THAT(sh[0], WithinAbs(0.75, 1e-12));
  CHECK_THAT(sh[1], WithinAbs(0.25, 1e-12));

  SECTION("linearity in final demand") {
    std::mt19937_64 rng(56);
    std::uniform_real_distribution<double> u(0.0, 20.0), k(0.1, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vector f1(4), f2(4);
      for (int i = 0; i < 4; ++i) {
        f1[i] = u(rng);
        f2[i] = u(rng);
      }
      const double a1 = k(rng), a2 = k(rng);
      const auto s1 = trace_material_sourcing(sys, l, f1, conc, mf, 2024);
      const auto s2 = trace_material_sourcing(sys, l, f2, conc, mf, 2024);
      const auto s12 = trace_material_sourcing(sys, l, a1 * f1 + a2 * f2, conc, mf, 2024);
      for (std::size_t r = 0; r < 2; ++r) {
        const double lhs = s12.mass_kg[index(Material::copper)][r];
        const double rhs = a1 * s1.mass_kg[index(Material::copper)][r] + a2 * s2.mass_kg[index(Material::copper)][r];
        CHECK_THAT(lhs, WithinRel(rhs, 1e-12));
      }
    }
    const auto doubled = trace_material_sourcing(sys, l, 2.0 * f, conc, mf, 2024);
    CHECK_THAT(doubled.total(Material::copper), WithinRel(2.0 * s.total(Material::copper), 1e-14));
    CHECK_THAT(doubled.shares(Material::copper)[0], WithinAbs(sh[0], 1e-14));
  }

  SECTION("concordance errors") {
    CHECK_THROWS_AS(trace_material_sourcing(sys, l, f, {{"tin_goods", Material::tin}}, mf, 2024), ConcordanceError);
    CHECK_THROWS_AS(trace_material_sourcing(sys, l, f, {{"copper_goods", Material::zinc}}, mf, 2024),
                    ConcordanceError);
  }
}

TEST_CASE("trade disruption") {
  MaterialSourcing s;
  s.year = 2030;
  s.regions = {"A", "B", "C"};
  for (auto& v : s.mass_kg) v = {0.0, 0.0, 0.0};
  s.mass_kg[index(Material::copper)] = {60.0, 30.0, 10.0};
  s.mass_kg[index(Material::steel)] = {1.0, 2.0, 7.0};

  const auto same = apply_trade_disruption(s, {"C"}, 0.0);
  CHECK(same.mass_kg == s.mass_kg);

  const auto cut = apply_trade_disruption(s, {"C"}, 0.7);
  CHECK_THAT(cut.total(Material::copper), WithinRel(0.93 * s.total(Material::copper), 1e-14));
  double share_sum = 0.0;
  for (double x : cut.shares(Material::copper)) share_sum += x;
  CHECK_THAT(share_sum, WithinAbs(1.0, 1e-12));

  const auto gone = apply_trade_disruption(s, {"B", "C"}, 1.0);
  CHECK(gone.mass(Material::steel, "B") == 0.0);
  CHECK(gone.shares(Material::steel) == std::vector<double>{1.0, 0.0, 0.0});

  CHECK_THROWS_AS(apply_trade_disruption(s, {"Z"}, 0.7), ConfigError);
  CHECK_THROWS_AS(apply_trade_disruption(s, {"A"}, 1.2), ConfigError);
}

TEST_CASE("property: shares sum to one before and after disruption") {
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(0.0, 100.0), cut(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    MaterialSourcing s;
    s.regions = {"A", "B", "C", "D"};
    for (auto& v : s.mass_kg) v = {u(rng), u(rng), u(rng), u(rng)};
    const auto d = apply_trade_disruption(s, {"B", "D"}, cut(rng));
    for (auto m : all_materials()) {
      for (const MaterialSourcing* src : std::array<const MaterialSourcing*, 2>{&s, &d}) {
        double sum = 0.0;
        for (double x : src->shares(m)) {
          CHECK(x >= 0.0);
          sum += x;
        }
        CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
      }
    }
  }
}

TEST_CASE("share extrapolation") {
  std::vector<MaterialSourcing> obs;
  for (int y = 2020; y <= 2022; ++y) {
    MaterialSourcing s;
    s.year = y;
    s.regions = {"A", "B"};
    for (auto& v : s.mass_kg) v = {0.0, 0.0};
    const double a = 0.5 + 0.1 * (y - 2020);
    s.mass_kg[index(Material::copper)] = {a, 1.0 - a};
    obs.push_back(s);
  }
  const auto proj = extrapolate_shares(obs, 2023);
  CHECK_THAT(proj[index(Material::copper)][0], WithinAbs(0.8, 1e-12));
  CHECK_THAT(proj[index(Material::copper)][1], WithinAbs(0.2, 1e-12));
  const auto far = extrapolate_shares(obs, 2030);
  CHECK(far[index(Material::copper)] == std::vector<double>{1.0, 0.0});
  CHECK(proj[index(Material::steel)] == std::vector<double>{0.0, 0.0});
}

TEST_CASE("file interchange") {
  const auto dir = temp_dir();
  write(dir / "axes.json", R"({"regions":["A","B"],"products":["ore","kit"],"industries":["mine","plant"]})");
  write(dir / "use.csv", "row_label,col_label,value\nA/ore,A/plant,2\nB/ore,B/plant,1\n");
  // Supply given industries x products.
  write(dir / "supply.csv",
        "row_label,col_label,value\nA/mine,A/ore,10\nA/plant,A/kit,20\nB/mine,B/ore,5\nB/plant,B/kit,8\n");
  write(dir / "conc.csv", "product_group,material\nore,copper\n");
  write(dir / "mass.csv", "material,kg_per_unit_value\ncopper,1000\n");

  const auto sys = load_system(dir / "axes.json", dir / "use.csv", dir / "supply.csv");
  CHECK(sys.supply()(0, 0) == 10.0);
  CHECK(sys.supply()(1, 1) == 20.0);
  CHECK(sys.use()(0, 1) == 2.0);
  CHECK(sys.industry_output()[3] == 8.0);
  CHECK(read_concordance(dir / "conc.csv") == Concordance{{"ore", Material::copper}});
  CHECK(read_mass_factors(dir / "mass.csv").at(Material::copper) == 1000.0);

  write(dir / "bad.csv", "row_label,col_label,value\nA/ore,Z/plant,2\n");
  CHECK_THROWS_AS(read_triplets(dir / "bad.csv", sys.axes()), InputError);
  write(dir / "bad_axes.json", R"({"regions":[],"products":["ore"],"industries":["mine"]})");
  CHECK_THROWS_AS(read_axes(dir / "bad_axes.json"), InputError);
  CHECK_THROWS_AS(read_axes(dir / "missing.json"), InputError);
}
