#include <doctest.h>

#include <cmath>

#include "spinent/analysis.hpp"
#include "spinent/errors.hpp"

using namespace spinent;

namespace {

SweepSpec spec_for(ModelSpec m, std::string param, Grid g, int n = 8) {
  SweepSpec s;
  s.model = m;
  s.parameter = std::move(param);
  s.grid = g;
  s.lattice = LatticeSpec::chain(n);
  return s;
}

}  // namespace

TEST_CASE("grid") {
  CHECK(Grid{0.0, 1.0, 0.1}.size() == 11);
  CHECK(Grid{0.0, 0.95, 0.1}.size() == 10);
  CHECK(Grid{0.5, 0.5, 1.0}.size() == 1);
  CHECK(Grid{-2.0, 2.0, 0.01}.size() == 401);
  CHECK_THROWS_AS((Grid{0.0, 1.0, 0.0}.validate()), InvalidInput);
  CHECK_THROWS_AS((Grid{1.0, 0.0, 0.1}.validate()), InvalidInput);
}

TEST_CASE("pair resolution") {
  const auto chain = LatticeSpec::chain(8);
  const auto ladder = LatticeSpec::ladder(4);
  CHECK(resolve_pairs("nn", chain) == std::vector<SitePair>{{0, 1}});
  CHECK(resolve_pairs("0-3,nn", chain) == std::vector<SitePair>{{0, 3}, {0, 1}});
  CHECK(resolve_pairs("leg", ladder) == std::vector<SitePair>{{0, 2}});
  CHECK(resolve_pairs("rung", ladder) == std::vector<SitePair>{{0, 1}});
  CHECK_THROWS_AS(resolve_pairs("leg", chain), InvalidInput);
  CHECK_THROWS_AS(resolve_pairs("0-8", chain), InvalidInput);
  CHECK_THROWS_AS(resolve_pairs("2-2", chain), InvalidInput);
  CHECK_THROWS_AS(resolve_pairs("x", chain), InvalidInput);
  CHECK(default_pairs(ladder).size() == 2);
}

TEST_CASE("central differences") {
  Series s;
  const double h = 0.01;
  for (int k = 0; k <= 100; ++k) {
    const double x = k * h;
    s.grid.push_back(x);
    s.values.push_back(x * x * x);
  }
  const auto d1 = derivative(s, 1);
  REQUIRE(d1.values.size() == 99);
  for (std::size_t k = 0; k < d1.values.size(); ++k) {
    const double x = d1.grid[k];
    CHECK(d1.values[k] == doctest::Approx(3 * x * x + h * h).epsilon(1e-9));
  }
  const auto d2 = derivative(s, 2);
  for (std::size_t k = 0; k < d2.values.size(); ++k) CHECK(d2.values[k] == doctest::Approx(6 * d2.grid[k]).epsilon(1e-6));
  CHECK_THROWS_AS(derivative(s, 0), InvalidInput);
  CHECK_THROWS_AS(derivative(s, 5), InvalidInput);
  Series bad = s;
  bad.grid[10] += 1e-3;
  CHECK_THROWS_AS(derivative(bad, 1), InvalidInput);
}

TEST_CASE("extrema of a parabola are exact") {
  Series s;
  for (int k = 0; k <= 50; ++k) {
    const double x = k * 0.02;
    s.grid.push_back(x);
    s.values.push_back((x - 0.313) * (x - 0.313) - 1.0);
  }
  const auto ex = locate_extrema(s);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].kind == ExtremumKind::min);
  CHECK(ex[0].location == doctest::Approx(0.313).epsilon(1e-12));
  CHECK(ex[0].value == doctest::Approx(-1.0).epsilon(1e-12));
  // monotone series: nothing
  Series m{{0, 1, 2, 3}, {0, 1, 2, 3}};
  CHECK(locate_extrema(m).empty());
}

TEST_CASE("inverse size fit") {
  std::vector<std::pair<int, double>> pts;
  for (int n : {6, 8, 10, 12}) pts.push_back({n, 1.0 + 2.0 / n});
  const auto f = fit_inverse_size(pts);
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.residual < 1e-12);
  CHECK(f.points == 4);
}

TEST_CASE("scaling on synthetic curves") {
  std::vector<std::pair<int, Series>> curves;
  for (int n : {6, 8, 10}) {
    Series s;
    const double c = 1.0 + 1.0 / n;
    for (int k = 0; k <= 200; ++k) {
      const double g = k * 0.01;
      s.grid.push_back(g);
      s.values.push_back(-std::tanh(5.0 * (g - c)));
    }
    curves.push_back({n, s});
  }
  const auto r = scaling_from_series(curves, 1);
  REQUIRE(r.sizes.size() == 3);
  CHECK(r.monotone);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(r.sizes[k].extremum.has_value());
    CHECK(r.sizes[k].extremum->location == doctest::Approx(1.0 + 1.0 / r.sizes[k].n_sites).epsilon(1e-3));
  }
  REQUIRE(r.fit.has_value());
  CHECK(r.fit->intercept == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("sweep values and labels at the isotropic point") {
  auto spec = spec_for(ModelSpec::xxz(1.0), "delta", {0.9, 1.1, 0.1});
  spec.k_levels = 4;
  const auto r = sweep(spec);
  REQUIRE(r.points.size() == 3);
  const auto& p = r.points[1];
  REQUIRE(p.ok);
  CHECK(p.g == doctest::Approx(1.0));
  CHECK(p.states[0].energy == doctest::Approx(-3.651093408937174).epsilon(1e-12));
  for (int k = 1; k <= 3; ++k) {
    CHECK(p.states[k].energy == doctest::Approx(-3.1284190638445795).epsilon(1e-12));
    CHECK(*p.states[k].label.total_spin == doctest::Approx(1.0));
  }
  CHECK(p.pairs[0].concurrence.value == doctest::Approx(0.412773352234294).epsilon(1e-11));
  const auto lv = distinct_levels(p, 1e-8);
  REQUIRE(lv.size() >= 3);
  CHECK(lv[1].members.size() == 3);
  CHECK(level_label(p, lv[1]).total_spin == 1.0);
  // oracle levels at 1.1: -3.774568 (1), -3.282814 (1), -3.209077 (2)
  const auto lv2 = distinct_levels(r.points[2], 1e-8);
  CHECK(lv2[1].energy == doctest::Approx(-3.282814).epsilon(1e-6));
  CHECK(lv2[2].members.size() == 2);
}

TEST_CASE("sweep output does not depend on the thread count") {
  auto spec = spec_for(ModelSpec::j1j2(1.0, 0.0), "j2", {0.0, 0.6, 0.05});
  spec.threads = 1;
  const auto a = sweep(spec);
  spec.threads = 4;
  const auto b = sweep(spec);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].energies() == b.points[k].energies());
    const double ca = a.concurrence()[k], cb = b.concurrence()[k];
    CHECK((ca == cb || (std::isnan(ca) && std::isnan(cb))));
  }
}

TEST_CASE("degenerate ground states have no concurrence") {
  const auto r = sweep(spec_for(ModelSpec::j1j2(1.0, 0.5), "j2", {0.49, 0.51, 0.01}));
  const auto c = r.concurrence();
  CHECK(c[0] == doctest::Approx(0.341357226383).epsilon(1e-10));
  CHECK(std::isnan(c[1]));
  CHECK(r.points[1].ground_multiplicity == 2);
}

TEST_CASE("failed points are flagged and the sweep continues") {
  auto spec = spec_for(ModelSpec::xxz(1.0), "delta", {0.0, 0.2, 0.1}, 12);
  spec.solver.dense_threshold = 0;
  spec.solver.lanczos.max_iter = 3;
  const auto r = sweep(spec);
  CHECK(r.failures() == 3);
  for (const auto& p : r.points) {
    CHECK_FALSE(p.ok);
    CHECK_FALSE(p.error.empty());
  }
}

TEST_CASE("sweep spec validation") {
  auto spec = spec_for(ModelSpec::xxz(1.0), "lambda", {0.0, 1.0, 0.1});
  CHECK_THROWS_AS(sweep(spec), InvalidInput);
  spec = spec_for(ModelSpec::ising(1.0), "lambda", {0.0, 1.0, 0.1});
  CHECK_THROWS_AS(sweep(spec), InvalidInput);  // lambda = 0 at the left end
  spec = spec_for(ModelSpec::ising(1.0), "lambda", {0.5, 1.0, 0.1});
  spec.only_sz_twice = 0;
  CHECK_THROWS_AS(sweep(spec), InvalidInput);
}

TEST_CASE("off-grid crossing is refined") {
  auto spec = spec_for(ModelSpec::j1j2(1.0, 0.0), "j2", {0.305, 0.695, 0.01});
  spec.keep_states = true;
  const auto r = sweep(spec);
  const auto ev = detect_crossings(r, 0, 1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == CrossingKind::true_crossing);
  CHECK(std::abs(ev[0].location - 0.5) < 1e-6);
  CHECK_FALSE(ev[0].on_grid_point);
  CHECK(ev[0].gap <= 1e-8);
  CHECK(ev[0].bracket_lo < 0.5);
  CHECK(ev[0].bracket_hi > 0.5);
  // no stored states: rejected
  spec.keep_states = false;
  CHECK_THROWS_AS(detect_crossings(sweep(spec), 0, 1), InvalidInput);
}

TEST_CASE("classification of the frustrated chain") {
  auto spec = spec_for(ModelSpec::j1j2(1.0, 0.0), "j2", {0.3, 0.7, 0.02});
  spec.keep_states = true;
  const auto rep = classify(sweep(spec));
  CHECK(rep.type == TransitionType::I);
  REQUIRE(rep.location.has_value());
  CHECK(*rep.location == doctest::Approx(0.5).epsilon(1e-6));
  REQUIRE(rep.concurrence_jump.has_value());
  CHECK(*rep.concurrence_jump > rep.jump_tol);
}

TEST_CASE("type strings") {
  CHECK(to_string(TransitionType::I) == "I");
  CHECK(to_string(TransitionType::III) == "III");
  CHECK(to_string(TransitionType::none) == "none");
  CHECK(to_string(CrossingKind::avoided) == "avoided");
}
