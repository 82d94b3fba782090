#include <cmath>

#include "helpers.hpp"

using namespace uhf;
using namespace testutil;

namespace {

oracle::Matrix dense(const LocalOperator& x, const oracle::SiteWindow& w) { return oracle::realize(x, w).matrix; }

}  // namespace

TEST_CASE("weyl_mul phases at N=2 agree with the dense matrices") {
  auto p = qubit();
  const auto g = WeylLabel::single(Site::origin(), {1, 0}, 2);
  const auto h = WeylLabel::single(Site::origin(), {0, 1}, 2);
  oracle::SiteWindow w({Site::origin()});
  auto sxm = oracle::site_matrix(2, 1, 0);
  auto szm = oracle::site_matrix(2, 0, 1);

  auto gh = weyl_mul(*p, g, h);
  CHECK(gh.label == WeylLabel::single(Site::origin(), {1, 1}, 2));
  CHECK(mdiff(p->omega_pow(gh.phase_exponent) * oracle::realize_label(*p, gh.label, w), sxm * szm) < 1e-15);
  CHECK(std::abs(p->omega_pow(gh.phase_exponent) - 1.0) < 1e-15);

  auto hg = weyl_mul(*p, h, g);
  CHECK(hg.label == WeylLabel::single(Site::origin(), {1, 1}, 2));
  CHECK(std::abs(p->omega_pow(hg.phase_exponent) + 1.0) < 1e-15);
  CHECK(mdiff(p->omega_pow(hg.phase_exponent) * oracle::realize_label(*p, hg.label, w), szm * sxm) < 1e-15);

  auto ge = weyl_mul(*p, g, WeylLabel());
  CHECK(ge.label == g);
  CHECK(ge.phase_exponent % 2 == 0);
}

TEST_CASE("weyl self test passes for N in 2..5") {
  for (int N = 2; N <= 5; ++N) CHECK_NOTHROW(weyl_self_test(*AlgebraParams::make(N, 1)));
}

TEST_CASE("products of single-site strings") {
  auto p = qubit();
  CHECK((sx(p) * sx(p)).distance(one(p)) == 0.0);
  auto uv = LocalOperator::site_op(p, Site::origin(), 1, 1);
  CHECK((uv * uv).distance(-one(p)) == 0.0);
  Rng rng(1);
  auto x = random_operator(rng, p, line_sites(0, 2), 4);
  CHECK((x * one(p)).distance(x) == 0.0);
}

TEST_CASE("adjoint examples") {
  auto p = qubit();
  auto uv = LocalOperator::site_op(p, Site::origin(), 1, 1);
  CHECK(op_adjoint(uv).distance(-uv) < 1e-15);
  CHECK(op_adjoint(one(p)).distance(one(p)) == 0.0);
  CHECK(op_adjoint(Complex(0, 1) * sx(p)).distance(Complex(0, -1) * sx(p)) < 1e-15);
}

TEST_CASE("commutator examples") {
  auto p = qubit();
  auto uv = LocalOperator::site_op(p, Site::origin(), 1, 1);
  CHECK(commutator(sx(p), sz(p)).distance(2.0 * uv) < 1e-15);
  CHECK(commutator(sx(p, 0), sz(p, 1)).is_zero());
  Rng rng(2);
  auto x = random_operator(rng, p, line_sites(0, 2), 3);
  CHECK(commutator(x, one(p)).is_zero());
}

TEST_CASE("translate examples") {
  auto p = qubit();
  CHECK(translate(sx(p, 0), Site::along(0, 1)).distance(sx(p, 1)) == 0.0);
  Rng rng(3);
  auto x = random_operator(rng, p, line_sites(0, 3), 4);
  CHECK(translate(x, Site::origin()).distance(x) == 0.0);
  const Site k = Site::along(0, 5);
  CHECK(translate(translate(x, k), -k).distance(x) == 0.0);
}

TEST_CASE("trace and GNS inner product") {
  auto p = qubit();
  CHECK(trace(one(p)) == Complex(1.0));
  CHECK(std::abs(trace(LocalOperator::site_op(p, Site::origin(), 1, 1))) == 0.0);
  CHECK(trace(3.0 * one(p) + 2.0 * sx(p)) == Complex(3.0));
  CHECK(gns_inner(one(p), one(p)) == Complex(1.0));

  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto g = random_label(rng, *p, line_sites(0, 3));
    auto h = random_label(rng, *p, line_sites(0, 3));
    oracle::SiteWindow w(line_sites(0, 3));
    auto G = oracle::realize_label(*p, g, w);
    auto H = oracle::realize_label(*p, h, w);
    const Complex ref = (G.adjoint() * H).trace() / static_cast<double>(G.rows());
    CHECK(std::abs(gns_inner(LocalOperator::basis(p, g), LocalOperator::basis(p, h)) - ref) < 1e-14);
  }
  auto u = random_operator(rng, p, line_sites(0, 2), 5);
  double s = 0;
  for (const auto& [g, c] : u.terms()) s += std::norm(c);
  CHECK(std::abs(gns_inner(u, u) - s) < 1e-12);
}

TEST_CASE("theta and c_x") {
  auto p = qubit();
  auto x = LocalOperator::basis(p, WeylLabel({{Site::along(0, 0), {1, 0}}, {Site::along(0, 1), {0, 1}}}, 2), 0.5);
  CHECK(theta(x, 1) == doctest::Approx(1.0));
  CHECK(theta(x, 2) == doctest::Approx(2.0));
  CHECK(theta(one(p), 1) == 0.0);
  CHECK(c_const(sz(p)) == doctest::Approx(2.0));
  CHECK(c_const(one(p)) == 0.0);
  CHECK(c_const(sx(p, 0) + sx(p, 1)) == doctest::Approx(6.0));
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto y = random_operator(rng, p, line_sites(0, 3), 4);
    CHECK(theta(y, 2) == doctest::Approx(theta(op_adjoint(y), 2)));
  }
}

TEST_CASE("seminorm_one") {
  auto p = qubit();
  CHECK(seminorm_one(one(p)) == 0.0);
  CHECK(seminorm_one(sx(p)) == doctest::Approx(4.0));
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    auto x = random_operator(rng, p, line_sites(0, 2), 3);
    const double s = seminorm_one(x);
    CHECK(seminorm_one(translate(x, Site::along(0, 3))) == doctest::Approx(s));
    CHECK(seminorm_one(op_adjoint(x)) == doctest::Approx(s));
  }
}

TEST_CASE("algebraic properties on random operators") {
  Rng rng(7);
  for (int d : {1, 2}) {
    auto p = qubit(d);
    const std::vector<Site> sites = d == 1 ? line_sites(0, 3)
                                           : std::vector<Site>{Site::of({0, 0}), Site::of({1, 0}), Site::of({0, 1})};
    oracle::SiteWindow w(sites);
    for (int i = 0; i < 40; ++i) {
      auto x = random_operator(rng, p, sites, 3);
      auto y = random_operator(rng, p, sites, 3);
      auto z = random_operator(rng, p, sites, 3);
      CHECK(mdiff(dense(x * y, w), dense(x, w) * dense(y, w)) < 1e-12);
      CHECK(mdiff(dense(op_adjoint(x), w), dense(x, w).adjoint()) < 1e-12);
      CHECK(((x * y) * z).distance(x * (y * z)) < 1e-12);
      CHECK((x * (y + z)).distance(x * y + x * z) < 1e-12);
      auto g = LocalOperator::basis(p, random_label(rng, *p, sites));
      CHECK((op_adjoint(g) * g).distance(one(p)) < 1e-15);
      CHECK(std::abs(gns_inner(x, y) - trace(op_adjoint(x) * y)) < 1e-12);
      const Site k = d == 1 ? Site::along(0, 4) : Site::of({2, -1});
      CHECK(translate(x * y, k).distance(translate(x, k) * translate(y, k)) < 1e-12);
      CHECK(translate(op_adjoint(x), k).distance(op_adjoint(translate(x, k))) < 1e-15);
      CHECK(std::abs(trace(translate(x, k)) - trace(x)) < 1e-15);
    }
    auto a = random_operator(rng, p, {sites[0]}, 3);
    auto b = random_operator(rng, p, {sites[1], sites[2]}, 3);
    CHECK(commutator(a, b).max_abs_coefficient() < 1e-15);
  }
}

TEST_CASE("coefficients below tolerance are dropped") {
  auto p = qubit();
  auto x = sx(p);
  x.add_term(WeylLabel::single(Site::origin(), {1, 0}, 2), -1.0 + 1e-17);
  CHECK(x.is_zero());
}

TEST_CASE("operator text round trip") {
  Rng rng(8);
  for (int d : {1, 2}) {
    auto p = qubit(d);
    for (int i = 0; i < 20; ++i) {
      auto x = random_operator(rng, p, {Site::origin(), Site::along(0, -2), Site::along(d - 1, 3)}, 4);
      CHECK(parse_operator(to_text(x), p).distance(x) == 0.0);
    }
  }
  auto p3 = AlgebraParams::make(3, 1);
  auto y = LocalOperator::site_op(p3, Site::along(0, 1), 2, 1, Complex(0.25, -1.5));
  CHECK(parse_operator(to_text(y), p3).distance(y) == 0.0);
}

TEST_CASE("operator text errors") {
  auto p = qubit();
  CHECK_THROWS_AS(parse_operator("1 0 ; 0:2,0", p), ConfigError);
  CHECK_THROWS_AS(parse_operator("1 ; 0:1,0", p), ConfigError);
  CHECK_THROWS_AS(parse_operator("1 0 ; 0,1:1,0", p), ConfigError);
}
