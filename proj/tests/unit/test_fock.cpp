#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "uhf/fock.hpp"

using namespace uhf;
using namespace uhf::fock;
using namespace testutil;
using lindblad::KrausFamily;

namespace {

std::vector<double> grid_to(double t_end, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(t_end * i / n);
  return g;
}

TestFunction one_mode(const NoiseMode& m, double t_max, std::vector<Complex> vals) {
  TestFunction f;
  f.set(m, StepFunction(t_max, std::move(vals)));
  return f;
}

TestFunction random_tf(Rng& rng, const std::vector<NoiseMode>& modes, double t_max, int cells, double amp) {
  std::normal_distribution<double> g;
  TestFunction f;
  for (const auto& m : modes) {
    std::vector<Complex> v;
    for (int i = 0; i < cells; ++i) v.emplace_back(amp * g(rng), amp * g(rng));
    f.set(m, StepFunction(t_max, v));
  }
  return f;
}

}  // namespace

TEST_CASE("step and test functions") {
  StepFunction s(2.0, {1.0, Complex(0, 2), 3.0, 4.0});
  CHECK(s.at(0.0) == Complex(1.0));
  CHECK(s.at(0.5) == Complex(0, 2));
  CHECK(s.at(1.99) == Complex(4.0));
  CHECK(s.at(2.5) == Complex(0.0));
  CHECK(s.l2_norm_sq() == doctest::Approx(0.5 * (1 + 4 + 9 + 16)));
  CHECK(StepFunction::indicator(2.0, 4, 1.0, 3.0).at(1.2) == Complex(0.0));

  TestFunction f;
  f.set({Site::origin(), 0}, StepFunction::constant(1.0, 2, 1.0));
  CHECK_THROWS_AS(f.set({Site::along(0, 1), 0}, StepFunction::constant(1.0, 3, 1.0)), ConfigError);
  f.set({Site::along(0, 1), 1}, StepFunction::constant(1.0, 2, 2.0));
  CHECK(f.norm_sq_at(0.5) == doctest::Approx(5.0));
  CHECK(f.gamma(1.0) == doctest::Approx(6.0));
  CHECK(f.sup_norm() == doctest::Approx(std::sqrt(5.0)));
  auto sh = f.shifted(Site::along(0, 1));
  CHECK(sh.at({Site::origin(), 1}, 0.1) == Complex(2.0));
  CHECK(sh.at({Site::along(0, -1), 0}, 0.1) == Complex(1.0));
  CHECK(f.restricted({Site::origin()}).modes().size() == 1);
  CHECK(f.without({Site::origin()}).modes().size() == 1);
}

TEST_CASE("exponential vector inner products") {
  const NoiseMode m0{Site::origin(), 0}, m1{Site::along(0, 1), 0};
  CHECK(exp_inner({}, {}) == Complex(1.0));
  auto f = one_mode(m0, 1.0, {1.0});
  CHECK(std::abs(exp_inner(f, f) - std::numbers::e) < 1e-14);
  CHECK(std::abs(exp_inner(f, one_mode(m1, 1.0, {1.0})) - 1.0) < 1e-15);
  auto g = one_mode(m0, 1.0, {Complex(0, 1)});
  CHECK(std::abs(exp_inner(f, g) - std::exp(Complex(0, 1))) < 1e-14);
}

TEST_CASE("generator systems") {
  auto p = qubit();
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::diagonal({0.6, 0.4}));
  auto sys = build_generator_system(P, SiteWindow({Site::origin()}));
  CHECK(sys.size() == 4);
  CHECK(sys.total_leakage() == 0.0);
  auto Lm = Eigen::MatrixXcd(sys.L());
  CHECK(Lm.col(sys.closure.find(WeylLabel())).cwiseAbs().maxCoeff() == 0.0);

  auto U = Lindbladian::translation_covariant(KrausFamily::make({sx(p)}, false));
  auto s2 = build_generator_system(U, SiteWindow(line_sites(-1, 3)));
  for (const auto& j : s2.noise) CHECK(std::abs(j.k.coord[0]) <= 2);
  CHECK(s2.noise.size() == 3);
  CHECK_THROWS_AS(build_generator_system(U, SiteWindow(line_sites(0, 8)), {}, 100), SizeError);
}

TEST_CASE("flow element examples") {
  auto p = qubit();
  Rng rng(41);
  auto mm = oracle::StateSpec::maximally_mixed(2);
  auto P = Lindbladian::partial_state(p, mm);
  auto sys = build_generator_system(P, SiteWindow({Site::origin()}));
  const auto grid = grid_to(2.0, 10);
  auto F = flow_element(sys, sx(p), sx(p), {}, one(p), {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(F.values[i] - std::exp(-grid[i])) < 1e-12);

  auto u = random_operator(rng, p, line_sites(0, 1), 3);
  auto v = random_operator(rng, p, line_sites(0, 1), 3);
  auto f = random_tf(rng, sys.noise, 2.0, 4, 0.5);
  auto g = random_tf(rng, sys.noise, 2.0, 4, 0.5);
  auto x = random_operator(rng, p, line_sites(0, 1), 3);
  auto Fx = flow_element(sys, x, u, f, v, g, grid);
  CHECK(std::abs(Fx.values[0] - gns_inner(u, x * v) * exp_inner(f, g)) < 1e-14);
  auto F1 = flow_element(sys, one(p), u, f, v, g, grid);
  for (const auto& val : F1.values) CHECK(std::abs(val - gns_inner(u, v) * exp_inner(f, g)) < 1e-9);

  // Adjoint symmetry.
  auto Fa = flow_element(sys, op_adjoint(x), v, g, u, f, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(Fa.values[i] - std::conj(Fx.values[i])) < 1e-9);

  // Methods agree.
  FlowOptions rk;
  rk.method = FlowMethod::rk4;
  auto Fr = flow_element(sys, x, u, f, v, g, grid, rk);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(Fr.values[i] - Fx.values[i]) < 1e-8);
  CHECK_THROWS_AS(flow_element(sys, x, u, f, v, g, {0.0, -1.0}), DomainError);
}

TEST_CASE("vacuum flow reduces to the semigroup") {
  auto p = qubit();
  Rng rng(42);
  auto r = nontrivial(rng, p, line_sites(0, 1), 3);
  auto L = Lindbladian::translation_covariant(KrausFamily::make({(0.7 / r.l1_norm()) * r}, false));
  auto x = random_operator(rng, p, line_sites(0, 2), 3);
  auto sys = build_generator_system(L, SiteWindow(line_sites(0, 2)), {x});
  CHECK(sys.total_leakage() == 0.0);
  auto u = random_operator(rng, p, line_sites(0, 2), 3);
  auto v = random_operator(rng, p, line_sites(0, 2), 3);
  const auto grid = grid_to(2.0, 8);
  auto F = flow_element(sys, x, u, {}, v, {}, grid);
  auto ev = lindblad::evolve(L, x, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(F.values[i] - gns_inner(u, ev.values[i] * v)) < 1e-8);
}

TEST_CASE("Picard error bound") {
  auto p = qubit();
  auto L = Lindbladian::translation_covariant(KrausFamily::make({sx(p)}, false));
  const auto x = sz(p);
  double prev = 0;
  bool decreasing_tail = true;
  for (int n = 1; n <= 30; ++n) {
    const double b = picard_error_bound(x, {}, 1e-3, n, L);
    if (n > 5 && b >= prev) decreasing_tail = false;
    prev = b;
  }
  CHECK(decreasing_tail);
  // f = 0, t0 = 1: c = 2e, so bound(1) = 3 sqrt(2e) (1 + ||r||) (2 theta_1(r) c_x).
  CHECK(picard_error_bound(x, {}, 1.0, 1, L) ==
        doctest::Approx(3.0 * std::sqrt(2.0 * std::numbers::e) * 2.0 * (2.0 * 1.0 * 2.0)));
  CHECK(picard_error_bound(one(p), {}, 1.0, 3, L) == 0.0);
  CHECK(picard_error_bound(x, {}, 1.0, 0, L) == 1.0);
}

TEST_CASE("Picard iteration agrees with the exponential solver") {
  auto p = qubit();
  Rng rng(43);
  auto L = Lindbladian::translation_covariant(KrausFamily::make({0.5 * sx(p) + 0.5 * LocalOperator::site_op(p, Site::along(0, 1), 1, 0)}, false));
  auto x = sz(p);
  auto sys = build_generator_system(L, SiteWindow(line_sites(-1, 3)), {x});
  auto u = one(p);
  auto f = random_tf(rng, {sys.noise[0]}, 0.05, 2, 0.3);
  FlowOptions po;
  po.method = FlowMethod::picard;
  po.picard_tol = 1e-8;
  const std::vector<double> grid{0.0, 0.02, 0.05};
  auto P = flow_element(sys, x, u, f, u, f, grid, po);
  auto E = flow_element(sys, x, u, f, u, f, grid);
  CHECK(P.picard_tail < 1e-8);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(P.values[i] - E.values[i]) < 1e-7);
}

TEST_CASE("pair trajectories") {
  auto p = qubit();
  Rng rng(44);
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::diagonal({0.3, 0.7}));
  auto sys = build_generator_system(P, SiteWindow({Site::origin()}));
  const auto grid = grid_to(1.0, 5);
  auto u = random_operator(rng, p, line_sites(0, 1), 3);
  auto v = random_operator(rng, p, line_sites(0, 1), 3);
  auto f = random_tf(rng, sys.noise, 1.0, 2, 0.4);
  auto g = random_tf(rng, sys.noise, 1.0, 2, 0.4);
  auto x = random_operator(rng, p, line_sites(0, 1), 2);
  auto y = random_operator(rng, p, line_sites(0, 1), 2);
  auto G = pair_element(sys, {{x, y}, {one(p), y}}, u, f, v, g, grid);
  auto Fy = flow_element(sys, y, u, f, v, g, grid);
  CHECK(std::abs(G.values[0][0] - gns_inner(u, x * y * v) * exp_inner(f, g)) < 1e-14);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(G.values[i][1] - Fy.values[i]) < 1e-9);
  CHECK(G.consistency < 1e-9);

  auto mm = Lindbladian::partial_state(p, oracle::StateSpec::maximally_mixed(2));
  auto s1 = build_generator_system(mm, SiteWindow({Site::origin()}));
  auto V = pair_element(s1, {{sx(p), sx(p)}}, one(p), {}, one(p), {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(V.values[i][0] - 1.0) < 1e-10);
}

TEST_CASE("homomorphism defect") {
  auto p = qubit();
  Rng rng(45);
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::diagonal({0.55, 0.45}));
  auto sys = build_generator_system(P, SiteWindow({Site::origin()}));
  const auto grid = grid_to(2.0, 10);
  auto u = random_operator(rng, p, line_sites(0, 1), 3);
  auto v = random_operator(rng, p, line_sites(0, 1), 3);
  auto f = random_tf(rng, sys.noise, 2.0, 4, 0.4);
  auto g = random_tf(rng, sys.noise, 2.0, 4, 0.4);
  auto x = random_operator(rng, p, line_sites(0, 1), 3);
  auto y = random_operator(rng, p, line_sites(0, 1), 3);
  CHECK(homomorphism_defect(sys, x, y, u, f, v, g, grid).max_defect < 1e-8);
  CHECK(homomorphism_defect(sys, x, one(p), u, f, v, g, grid).max_defect < 1e-9);

  // A leaky window: r = 1/4 U^(0) U^(1) U^(2) U^(3). The defect shrinks as the window grows
  // and stays inside the estimate.
  std::vector<WeylLabel::Entry> word;
  for (int s = 0; s < 4; ++s) word.push_back({Site::along(0, s), {1, 0}});
  auto L = Lindbladian::translation_covariant(
      KrausFamily::make({LocalOperator::basis(p, WeylLabel(word, 2), 0.25)}, false));
  auto xo = sz(p);
  auto yo = LocalOperator::site_op(p, Site::origin(), 1, 1);
  std::vector<double> defects;
  for (int rad = 1; rad <= 2; ++rad) {
    auto W = lindblad::padded_window(xo, rad);
    auto s = build_generator_system(L, W, {xo, yo, xo * yo});
    TestFunction ff, gg;
    for (const auto& j : L.noise_indices(W.sites())) {
      ff.set(j, StepFunction::indicator(2.0, 4, 1.0, 0.2));
      gg.set(j, StepFunction::indicator(2.0, 4, 1.0, Complex(0, 0.2)));
    }
    auto D = homomorphism_defect(s, xo, yo, sx(p) + 0.5 * one(p), ff, one(p), gg, grid_to(2.0, 10));
    for (std::size_t i = 0; i < D.defect.size(); ++i) CHECK(D.defect[i] <= D.estimate[i]);
    defects.push_back(D.max_defect);
  }
  CHECK(defects[0] > 0.1);
  CHECK(defects[1] < defects[0]);
}

TEST_CASE("contraction") {
  auto p = qubit();
  Rng rng(46);
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::diagonal({0.2, 0.8}));
  auto sys = build_generator_system(P, SiteWindow({Site::origin()}));
  auto f = random_tf(rng, sys.noise, 1.0, 2, 0.5);
  std::vector<FamilyMember> fam{{1.0, sx(p), f}, {Complex(0.3, -0.2), one(p), {}}};
  auto c1 = contraction_check(sys, one(p), fam, 1.0);
  CHECK(c1.lhs == doctest::Approx(c1.rhs).epsilon(1e-9));
  auto cu = contraction_check(sys, LocalOperator::site_op(p, Site::origin(), 1, 1), {{1.0, sz(p), {}}}, 1.0);
  CHECK(cu.lhs == doctest::Approx(cu.rhs).epsilon(1e-9));
  auto c2 = contraction_check(sys, sx(p) + sz(p), fam, 1.0);
  CHECK(c2.lhs <= c2.rhs + c2.error + 1e-9);
  CHECK(c2.lhs >= -(c2.error + 1e-9));
  CHECK(c2.rhs == doctest::Approx(2.0 * (c1.rhs)).epsilon(1e-9));
  CHECK(c2.imag_residual < 1e-9);
  CHECK_THROWS_AS(contraction_check(sys, sx(p), {}, 1.0), DomainError);
}

TEST_CASE("covariance") {
  auto p = qubit();
  Rng rng(47);
  auto P = Lindbladian::partial_state(p, oracle::StateSpec::diagonal({0.4, 0.6}));
  auto x = random_operator(rng, p, line_sites(0, 2), 3);
  auto u = random_operator(rng, p, line_sites(0, 2), 2);
  auto v = random_operator(rng, p, line_sites(0, 2), 2);
  SiteWindow W(line_sites(0, 2));
  const auto grid = grid_to(1.0, 4);
  CHECK(covariance_check(P, W, x, u, {}, v, {}, Site::origin(), grid).deviation == 0.0);
  CHECK(covariance_check(P, W, x, u, {}, v, {}, Site::along(0, 1), grid).deviation < 1e-9);
  auto f = random_tf(rng, P.noise_indices(W.sites()), 1.0, 2, 0.3);
  auto g = random_tf(rng, P.noise_indices(W.sites()), 1.0, 2, 0.3);
  auto c = covariance_check(P, W, x, u, f, v, g, Site::along(0, 1), grid);
  CHECK(c.deviation <= 2.0 * c.estimate + 1e-15);
}

TEST_CASE("eta flows") {
  auto p = qubit();
  Rng rng(48);
  auto phi = oracle::StateSpec::diagonal({0.75, 0.25});
  const auto grid = grid_to(2.0, 8);
  auto u = random_operator(rng, p, line_sites(0, 1), 3);
  auto v = random_operator(rng, p, line_sites(0, 1), 3);
  auto x = random_operator(rng, p, line_sites(0, 1), 3);
  auto F = eta_site_flow(phi, Site::origin(), x, u, {}, v, {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(F.values[i] - gns_inner(u, lindblad::partial_semigroup_exact(phi, x, grid[i]) * v)) < 1e-9);
  }
  auto F1 = eta_site_flow(phi, Site::origin(), one(p), u, {}, v, {}, grid);
  for (const auto& val : F1.values) CHECK(std::abs(val - gns_inner(u, v)) < 1e-12);
  CHECK_THROWS_AS(eta_site_flow(phi, Site::origin(), sx(p, 1), u, {}, v, {}, grid), DomainError);

  // Product flow factorizes over sites and does not depend on the site order.
  auto u0 = random_operator(rng, p, {Site::origin()}, 2), u1 = random_operator(rng, p, {Site::along(0, 1)}, 2);
  auto v0 = random_operator(rng, p, {Site::origin()}, 2), v1 = random_operator(rng, p, {Site::along(0, 1)}, 2);
  auto xx = sx(p, 0) * sx(p, 1);
  auto a = eta_product_flow(phi, SiteWindow(line_sites(0, 2)), xx, u0 * u1, {}, v0 * v1, {}, grid);
  auto b = eta_product_flow(phi, SiteWindow({Site::along(0, 1), Site::origin()}), xx, u0 * u1, {}, v0 * v1, {}, grid);
  auto f0 = eta_site_flow(phi, Site::origin(), sx(p, 0), u0, {}, v0, {}, grid);
  auto f1 = eta_site_flow(phi, Site::along(0, 1), sx(p, 1), u1, {}, v1, {}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a.values[i] - f0.values[i] * f1.values[i]) < 1e-10);
    CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
  }
  auto c = eta_product_flow(phi, SiteWindow(line_sites(0, 2)), one(p), u0 * u1, {}, v0 * v1, {}, grid);
  for (const auto& val : c.values) CHECK(std::abs(val - gns_inner(u0 * u1, v0 * v1)) < 1e-12);
}

TEST_CASE("eta ergodicity scans") {
  auto p = qubit();
  auto mm = oracle::StateSpec::maximally_mixed(2);
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(0.1 * i);
  auto z = eta_ergodicity_scan(mm, sx(p), one(p), {}, one(p), {}, grid);
  for (double v : z.values) CHECK(v < 1e-14);
  auto s = eta_ergodicity_scan(mm, sx(p), sx(p), {}, one(p), {}, grid);
  REQUIRE(s.fit_ok);
  CHECK(s.fit.rate == doctest::Approx(1.0).epsilon(1e-3));
  auto o = eta_ergodicity_scan(mm, one(p), sx(p), {}, one(p), {}, grid);
  for (double v : o.values) CHECK(v < 1e-12);
}

TEST_CASE("HP divergence witness") {
  for (int d : {1, 2}) {
    auto p = qubit(d);
    auto S = hp_divergence_witness(LocalOperator::site_op(p, Site::origin(), 1, 0), one(p), 10);
    for (int K = 1; K <= 10; ++K) CHECK(S[static_cast<std::size_t>(K - 1)] == std::pow(2.0 * K + 1, d));
    auto Z = hp_divergence_witness(LocalOperator::zero(p), one(p), 4);
    for (double s : Z) CHECK(s == 0.0);
  }
}
