#include <cmath>

#include "helpers.hpp"
#include "uhf/lindblad.hpp"

using namespace uhf;
using namespace uhf::lindblad;
using namespace testutil;

namespace {

Lindbladian single_r(const LocalOperator& r) { return Lindbladian::translation_covariant(KrausFamily::make({r}, false)); }

LocalOperator uv(const ParamsPtr& p, std::int64_t s = 0) { return LocalOperator::site_op(p, Site::along(0, s), 1, 1); }

Lindbladian random_covariant(Rng& rng, const ParamsPtr& p, int len) {
  auto r = nontrivial(rng, p, line_sites(0, len), 2);
  return single_r((0.8 / r.l1_norm()) * r);
}

}  // namespace

TEST_CASE("structure derivations") {
  auto p = qubit();
  auto L = single_r(sx(p));
  const NoiseIndex k0{Site::origin(), 0};
  auto d = delta(L, k0, sz(p));
  oracle::SiteWindow w({Site::origin()});
  oracle::Matrix D = oracle::realize(sz(p), w).matrix * oracle::realize(sx(p), w).matrix -
           oracle::realize(sx(p), w).matrix * oracle::realize(sz(p), w).matrix;
  CHECK(mdiff(oracle::realize(d, w).matrix, D) < 1e-15);
  CHECK(d.distance(-2.0 * uv(p)) < 1e-15);
  CHECK(delta(L, k0, one(p)).is_zero());
  CHECK(delta(L, {Site::along(0, 3), 0}, sz(p)).is_zero());
  CHECK(delta_dag(L, {Site::along(0, 3), 0}, sz(p)).is_zero());
}

TEST_CASE("lind_zero examples") {
  auto p = qubit();
  auto L = single_r(sx(p));
  CHECK(lind_zero(L, one(p)).is_zero());
  CHECK(lind_zero(L, sz(p)).distance(-2.0 * sz(p)) < 1e-15);
  CHECK(lind_zero_commutator_form(L, sz(p)).distance(-2.0 * sz(p)) < 1e-15);
  Rng rng(21);
  auto phi = oracle::StateSpec::diagonal({0.6, 0.4});
  auto P = Lindbladian::partial_state(p, phi);
  for (int i = 0; i < 10; ++i) {
    auto x = random_operator(rng, p, line_sites(0, 2), 3);
    CHECK(lind_zero(P, x).distance(partial_state_site_map(phi, Site::origin(), x)) < 1e-14);
  }
}

TEST_CASE("lind_total examples and identities") {
  auto p = qubit();
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::maximally_mixed(2));
  CHECK(lind_total(P, sx(p)).distance(-sx(p)) < 1e-15);
  CHECK(lind_total(P, one(p)).is_zero());
  Rng rng(22);
  for (int i = 0; i < 30; ++i) {
    auto L = random_covariant(rng, p, 1 + i % 2);
    auto x = random_operator(rng, p, line_sites(-1, 3), 3);
    auto y = random_operator(rng, p, line_sites(0, 2), 3);
    CHECK(lind_total(L, one(p)).max_abs_coefficient() < 1e-15);
    CHECK(lind_total(L, op_adjoint(x)).distance(op_adjoint(lind_total(L, x))) < 1e-12);
    CHECK(cocycle_defect(L, x, y) < 1e-12);
    const Site j = Site::along(0, i % 5 - 2);
    CHECK(lind_total(L, translate(x, j)).distance(translate(lind_total(L, x), j)) < 1e-12);
  }
}

TEST_CASE("contributing translates") {
  auto p = qubit();
  auto L = single_r(sx(p, 0) * sx(p, 1));
  auto ks = L.contributing_sites({Site::origin()});
  CHECK(ks.size() == 2);
  auto ni = L.noise_indices(line_sites(-1, 3));
  for (const auto& j : ni) CHECK(std::abs(j.k.coord[0]) <= 2);
  CHECK(L.radius() == 1);
}

TEST_CASE("Kraus family validation") {
  auto p = qubit();
  CHECK_THROWS_AS(KrausFamily::make({}, false), ConfigError);
  CHECK_THROWS_AS(KrausFamily::make({2.0 * sx(p)}, true), DomainError);
  CHECK_NOTHROW(KrausFamily::make({sx(p)}, true));
}

TEST_CASE("evolve examples") {
  auto p = qubit();
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::maximally_mixed(2));
  Rng rng(23);
  auto x = random_operator(rng, p, line_sites(0, 2), 3);
  for (auto m : {EvolveMethod::series, EvolveMethod::ode, EvolveMethod::exact_closed_form, EvolveMethod::oracle}) {
    EvolveOptions o;
    o.method = m;
    CHECK(evolve(P, x, {0.0}, o).values[0].distance(x) < 1e-15);
  }
  auto xx = sx(p, 0) * sx(p, 1);
  auto ev = evolve(P, xx, {0.5, 1.0, 3.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(ev.values[i].distance(std::exp(-2.0 * ev.grid[i]) * xx) < 1e-10);
  auto one_site = evolve(P, sx(p), {1.0});
  CHECK(one_site.values[0].distance(std::exp(-1.0) * sx(p)) < 1e-10);
  CHECK_THROWS_AS(evolve(P, x, {-0.1}), DomainError);
}

TEST_CASE("evolve agrees with the dense oracle and respects the semigroup law") {
  auto p = qubit();
  Rng rng(24);
  const std::vector<double> grid{0.0, 0.3, 0.7, 1.0};
  for (int i = 0; i < 8; ++i) {
    auto L = random_covariant(rng, p, 1 + i % 2);
    auto x = random_operator(rng, p, line_sites(0, 1), 3);
    EvolveOptions o;
    o.window = oracle::SiteWindow(line_sites(-1, 3));
    o.method = EvolveMethod::oracle;
    auto ref = evolve(L, x, grid, o);
    for (auto m : {EvolveMethod::series, EvolveMethod::ode}) {
      o.method = m;
      auto got = evolve(L, x, grid, o);
      for (std::size_t k = 0; k < grid.size(); ++k) CHECK(got.values[k].distance(ref.values[k]) < 1e-9);
    }
    o.method = EvolveMethod::ode;
    auto a = evolve(L, x, {0.4}, o).values[0];
    auto b = evolve(L, a, {0.3}, o).values[0];
    CHECK(b.distance(ref.values[2]) < 1e-10);
    for (const auto& v : evolve(L, one(p), grid, o).values) CHECK(v.distance(one(p)) < 1e-12);
    const Site j = Site::along(0, 3);
    auto shifted = evolve(L, translate(x, j), grid);
    auto plain = evolve(L, x, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(shifted.values[k].distance(translate(plain.values[k], j)) < 1e-10);
    }
  }
}

TEST_CASE("partial-state closed form") {
  auto p = qubit();
  auto mm = oracle::StateSpec::maximally_mixed(2);
  CHECK(partial_semigroup_exact(mm, uv(p), 0.8).distance(std::exp(-0.8) * uv(p)) < 1e-15);
  CHECK(partial_semigroup_exact(mm, one(p), 2.0).distance(one(p)) < 1e-15);
  Rng rng(25);
  auto phi = oracle::StateSpec::diagonal({0.8, 0.2});
  auto L = Lindbladian::partial_state(p, phi);
  for (int i = 0; i < 10; ++i) {
    auto x = random_operator(rng, p, line_sites(0, 2), 4);
    EvolveOptions o;
    o.method = EvolveMethod::series;
    auto s = evolve(L, x, {0.5, 1.0}, o);
    o.method = EvolveMethod::oracle;
    auto d = evolve(L, x, {0.5, 1.0}, o);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto exact = partial_semigroup_exact(phi, x, s.grid[k]);
      CHECK(s.values[k].distance(exact) < 1e-10);
      CHECK(d.values[k].distance(exact) < 1e-10);
    }
  }
}

TEST_CASE("ergodic state") {
  auto p = qubit();
  const double q = 0.7;
  auto phi = oracle::StateSpec::diagonal({q, 1 - q});
  CHECK(std::abs(ergodic_state(phi, sz(p)) - (2 * q - 1)) < 1e-15);
  CHECK(std::abs(ergodic_state(phi, sz(p, 0) * sz(p, 1)) - (2 * q - 1) * (2 * q - 1)) < 1e-15);
  CHECK(std::abs(ergodic_state(phi, one(p)) - 1.0) < 1e-15);
}

TEST_CASE("perturbed ergodic state") {
  auto p = qubit();
  auto phi = oracle::StateSpec::diagonal({0.7, 0.3});
  auto fam = KrausFamily::make({sx(p)}, true);
  CHECK(std::abs(perturbed_ergodic_state(phi, fam, 0.0, sz(p)).value - ergodic_state(phi, sz(p))) < 1e-15);
  CHECK(std::abs(perturbed_ergodic_state(phi, fam, 0.3, one(p)).value - 1.0) < 1e-12);
  // Stationarity on a two-site observable.
  const double c = 0.1;
  auto x = sz(p, 0) * sz(p, 1) + 0.5 * sx(p, 1);
  auto L = Lindbladian::perturbed(p, phi, fam, c);
  auto xs = evolve(L, x, {0.7}).values[0];
  auto a = perturbed_ergodic_state(phi, fam, c, x);
  auto b = perturbed_ergodic_state(phi, fam, c, xs);
  CHECK(std::abs(a.value - b.value) < 1e-6);
  CHECK(a.error_estimate < 1e-6);
}

TEST_CASE("decay rate fit") {
  std::vector<double> t, e, c, h;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.2 * i);
    e.push_back(std::exp(-t.back()));
    c.push_back(3.0);
    h.push_back(2.0 * std::exp(-0.5 * t.back()));
  }
  CHECK(decay_rate_fit(t, e).rate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(decay_rate_fit(t, c).rate) < 1e-12);
  CHECK(decay_rate_fit(t, h).rate == doctest::Approx(0.5).epsilon(1e-9));
  auto z = e;
  z[5] = 0;
  CHECK_THROWS_AS(decay_rate_fit(t, z), FitError);
  CHECK_THROWS_AS(decay_rate_fit({0.0, 1.0}, {1.0, 0.5}), FitError);
}

TEST_CASE("HS-norm decay of the partial-state semigroup has rate one") {
  auto p = qubit();
  Rng rng(26);
  auto phi = oracle::StateSpec::diagonal({0.65, 0.35});
  auto L = Lindbladian::partial_state(p, phi);
  std::vector<double> grid;
  for (int i = 0; i <= 24; ++i) grid.push_back(0.25 * i);
  for (int i = 0; i < 5; ++i) {
    auto x = nontrivial(rng, p, line_sites(0, 1), 3);
    auto target = LocalOperator::identity(p, ergodic_state(phi, x));
    auto ev = evolve(L, x, grid);
    std::vector<double> hs;
    for (const auto& v : ev.values) hs.push_back(gns_norm(v - target));
    auto fit = decay_rate_fit(grid, hs, {0.1, 0.9999});
    CHECK(fit.rate == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("multi-derivations") {
  auto p = qubit();
  Rng rng(27);
  auto L = random_covariant(rng, p, 2);
  auto x = random_operator(rng, p, line_sites(0, 2), 3);
  const Site k = Site::origin();
  CHECK(multi_derivation(L, x, {{k}, {0}}).distance(lind_site(L, k, x)) < 1e-14);
  const Site k2 = Site::along(0, 1);
  auto nested = delta(L, {k2, 0}, delta_dag(L, {k, 0}, x));
  CHECK(multi_derivation(L, x, {{k, k2}, {-1, 1}}).distance(nested) < 1e-14);
  for (int e1 : {-1, 0, 1}) {
    for (int e2 : {-1, 0, 1}) {
      auto lhs = op_adjoint(multi_derivation(L, x, {{k, k2}, {e1, e2}}));
      auto rhs = multi_derivation(L, op_adjoint(x), {{k, k2}, {-e1, -e2}});
      CHECK(lhs.distance(rhs) < 1e-12);
    }
  }
}

TEST_CASE("Leibniz expansion identity") {
  auto p = qubit();
  Rng rng(28);
  const SiteExponent words[] = {{1, 0}, {0, 1}, {1, 1}};
  for (int i = 0; i < 12; ++i) {
    LocalOperator r(p);
    while (r.support().empty()) r = random_commuting_word_operator(rng, p, words[i % 3], line_sites(0, 2), 2);
    auto L = single_r((1.0 / r.l1_norm()) * r);
    auto x = nontrivial(rng, p, line_sites(0, 2), 2);
    auto ks = L.contributing_sites(x.support());
    std::vector<Site> kbar{ks[static_cast<std::size_t>(i) % ks.size()]};
    CHECK(leibniz_expansion_check(L, x, kbar) < 1e-14);
    kbar.push_back(ks[static_cast<std::size_t>(i + 1) % ks.size()]);
    CHECK(leibniz_expansion_check(L, x, kbar) < 1e-12);
    CHECK(leibniz_expansion_check(L, one(p), kbar) == 0.0);
  }
}

TEST_CASE("lemma bounds") {
  auto p = qubit();
  auto L = single_r(sx(p));
  auto b = lemma_pure(L, sz(p), 1);
  CHECK(b.lhs == doctest::Approx(2.0));
  CHECK(b.rhs == doctest::Approx(4.0));
  auto b1 = lemma_pure(L, one(p), 2);
  CHECK(b1.lhs == 0.0);
  CHECK(b1.lhs <= b1.rhs);
  auto m = lemma_mixed(L, sz(p) + 0.5 * uv(p, 1), {1, 0});
  CHECK(m.lhs <= m.rhs);
  auto q = lemma_product(L, sz(p), uv(p), {1, -1}, {1}, {0});
  CHECK(q.lhs <= q.rhs);
}
