#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "uhf/harness.hpp"
#include "uhf/random.hpp"

namespace uhf::harness {

namespace {

using lindblad::KrausFamily;
using lindblad::Lindbladian;
using oracle::SiteWindow;
using oracle::StateSpec;

Verdict at_most(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), std::isfinite(measured) && measured <= threshold, measured, threshold,
          std::move(detail)};
}

Verdict at_least(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), std::isfinite(measured) && measured >= threshold, measured, threshold,
          std::move(detail)};
}

Verdict flag(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0, std::move(detail)};
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> range(double a, double h, double b) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  return out;
}

double max_abs(const oracle::Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<Site> square_sites() {
  return {Site::of({0, 0}), Site::of({1, 0}), Site::of({0, 1})};
}

/// Random operator scaled to l1 coefficient norm `l1`.
LocalOperator normalized(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites, int terms,
                         double l1 = 1.0) {
  LocalOperator x(p);
  while (x.is_zero()) x = random_operator(rng, p, sites, terms);
  return (l1 / x.l1_norm()) * x;
}

/// Gaussian coefficients on every label of the window, unit GNS norm.
LocalOperator dense_unit_vector(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites) {
  std::normal_distribution<double> g;
  LocalOperator x(p);
  for (const auto& lbl : oracle::window_basis(*p, SiteWindow(sites))) x.add_term(lbl, Complex(g(rng), g(rng)));
  return (1.0 / gns_norm(x)) * x;
}

/// Random operator with nonempty support.
LocalOperator nontrivial(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites, int terms) {
  LocalOperator x(p);
  while (x.support().empty()) x = random_operator(rng, p, sites, terms);
  return x;
}

/// Random operator scaled to unit GNS norm.
LocalOperator unit_vector(Rng& rng, const ParamsPtr& p, const std::vector<Site>& sites, int terms) {
  LocalOperator x(p);
  while (x.is_zero()) x = random_operator(rng, p, sites, terms);
  return (1.0 / gns_norm(x)) * x;
}

StateSpec random_state(Rng& rng, int N) {
  std::normal_distribution<double> g;
  oracle::Matrix a(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  oracle::Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return StateSpec(rho);
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

int pick(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

fock::TestFunction random_test_function(Rng& rng, const std::vector<fock::NoiseMode>& modes,
                                        double t_max, int cells, double amp, std::size_t max_modes = 3) {
  fock::TestFunction f;
  std::normal_distribution<double> g;
  std::size_t used = 0;
  for (const auto& m : modes) {
    if (used++ >= max_modes) break;
    std::vector<Complex> vals;
    for (int i = 0; i < cells; ++i) vals.emplace_back(amp * g(rng), amp * g(rng));
    f.set(m, fock::StepFunction(t_max, std::move(vals)));
  }
  return f;
}

LocalOperator word_string(const ParamsPtr& p, int len, SiteExponent e, Complex c) {
  std::vector<WeylLabel::Entry> entries;
  for (int s = 0; s < len; ++s) entries.push_back({Site::along(0, s), e});
  return LocalOperator::basis(p, WeylLabel(entries, p->N()), c);
}

// ---- 1 ----
CriterionResult c1_algebra(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p1 = AlgebraParams::make(2, 1);
  auto p2 = AlgebraParams::make(2, 2);
  double prod = 0, adj = 0, comm = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 500; ++i) {
    const bool two = i % 2 == 1;
    const auto& p = two ? p2 : p1;
    const auto sites = two ? square_sites() : line_sites(0, 3);
    SiteWindow w(sites);
    auto x = random_operator(rng, p, sites, 1 + pick(rng, 4));
    auto y = random_operator(rng, p, sites, 1 + pick(rng, 4));
    auto X = oracle::realize(x, w).matrix;
    auto Y = oracle::realize(y, w).matrix;
    prod = std::max(prod, max_abs(oracle::realize(x * y, w).matrix - X * Y));
    adj = std::max(adj, max_abs(oracle::realize(op_adjoint(x), w).matrix - X.adjoint()));
    comm = std::max(comm, max_abs(oracle::realize(commutator(x, y), w).matrix - (X * Y - Y * X)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.checks.push_back(at_most("product vs dense", prod, 1e-12));
  r.checks.push_back(at_most("adjoint vs dense", adj, 1e-12));
  r.checks.push_back(at_most("commutator vs dense", comm, 1e-12));
  r.checks.push_back(at_most("runtime [s]", secs, 30));
  return r;
}

Lindbladian random_generator(Rng& rng, const ParamsPtr& p, int kind, const std::vector<Site>& rsites) {
  switch (kind) {
    case 0: {
      std::vector<LocalOperator> ops;
      const int members = 1 + pick(rng, 2);
      for (int m = 0; m < members; ++m) ops.push_back(normalized(rng, p, rsites, 2, uniform(rng, 0.5, 1.0)));
      return Lindbladian::translation_covariant(KrausFamily::make(ops, false));
    }
    case 1:
      return Lindbladian::partial_state(p, random_state(rng, p->N()));
    default: {
      auto fam = KrausFamily::make({normalized(rng, p, rsites, 2, uniform(rng, 0.5, 1.0))}, false);
      return Lindbladian::perturbed(p, random_state(rng, p->N()), fam, uniform(rng, 0.0, 0.3));
    }
  }
}

// ---- 2 ----
CriterionResult c2_identities(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p1 = AlgebraParams::make(2, 1);
  auto p2 = AlgebraParams::make(2, 2);
  double unit = 0, star = 0, cocycle = 0, cov = 0;
  for (int i = 0; i < 200; ++i) {
    const bool two = i % 4 == 3;
    const auto& p = two ? p2 : p1;
    const auto xs = two ? square_sites() : line_sites(-1, 3);
    const auto rs = two ? std::vector<Site>{Site::of({0, 0}), Site::of({1, 0})} : line_sites(0, 2);
    auto L = random_generator(rng, p, i % 3, rs);
    auto x = random_operator(rng, p, xs, 2);
    auto y = random_operator(rng, p, xs, 2);
    unit = std::max(unit, lindblad::lind_total(L, LocalOperator::identity(p)).max_abs_coefficient());
    star = std::max(star, lindblad::lind_total(L, op_adjoint(x)).distance(op_adjoint(lindblad::lind_total(L, x))));
    cocycle = std::max(cocycle, lindblad::cocycle_defect(L, x, y));
    Site j = two ? Site::of({pick(rng, 5) - 2, pick(rng, 5) - 2}) : Site::along(0, pick(rng, 7) - 3);
    cov = std::max(cov, lindblad::lind_total(L, translate(x, j)).distance(translate(lindblad::lind_total(L, x), j)));
  }
  r.checks.push_back(at_most("L(1) = 0", unit, 1e-12));
  r.checks.push_back(at_most("L(x*) = L(x)*", star, 1e-12));
  r.checks.push_back(at_most("cocycle identity", cocycle, 1e-12));
  r.checks.push_back(at_most("covariance L tau_j = tau_j L", cov, 1e-12));
  return r;
}

// ---- 3 ----
CriterionResult c3_semigroup(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
  double series_err = 0, ode_err = 0, law = 0, unit = 0, choi = 1e300;
  for (int i = 0; i < 24; ++i) {
    const int kind = i % 3;
    auto L = random_generator(rng, p, kind, line_sites(0, 1 + pick(rng, 2)));
    auto x = random_operator(rng, p, line_sites(0, 1), 3);
    auto W = SiteWindow(line_sites(-1, 3));
    lindblad::EvolveOptions o;
    o.window = W;
    o.interior = true;
    o.method = lindblad::EvolveMethod::oracle;
    auto ref = lindblad::evolve(L, x, grid, o);
    o.method = lindblad::EvolveMethod::series;
    auto ser = lindblad::evolve(L, x, grid, o);
    o.method = lindblad::EvolveMethod::ode;
    auto ode = lindblad::evolve(L, x, grid, o);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      series_err = std::max(series_err, ser.values[k].distance(ref.values[k]));
      ode_err = std::max(ode_err, ode.values[k].distance(ref.values[k]));
    }
    auto half = lindblad::evolve(L, x, {0.6}, o).values[0];
    auto composed = lindblad::evolve(L, half, {0.4}, o).values[0];
    law = std::max(law, composed.distance(ode.values[3]));
    auto one = lindblad::evolve(L, LocalOperator::identity(p), grid, o);
    for (const auto& v : one.values) unit = std::max(unit, v.distance(LocalOperator::identity(p)));
    if (i % 3 == 0) {
      auto A = oracle::superoperator(L.kraus_terms(), p, W, oracle::Closure::interior);
      auto basis = oracle::window_basis(*p, W);
      for (double t : {0.3, 1.0}) {
        oracle::Matrix T = (Complex(t) * A).exp();
        choi = std::min(choi, oracle::min_hermitian_eigenvalue(oracle::choi_matrix(T, basis, W, p)));
      }
    }
  }
  r.checks.push_back(at_most("series vs dense expm", series_err, 1e-9));
  r.checks.push_back(at_most("ode vs dense expm", ode_err, 1e-9));
  r.checks.push_back(at_most("semigroup law", law, 1e-10));
  r.checks.push_back(at_most("P_t(1) = 1", unit, 1e-10));
  r.checks.push_back(at_least("Choi min eigenvalue", choi, -1e-9));
  return r;
}

// ---- 4 ----
CriterionResult c4_partial_state(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
  double closed = 0;
  for (int i = 0; i < 20; ++i) {
    auto phi = random_state(rng, 2);
    auto L = Lindbladian::partial_state(p, phi);
    auto x = random_operator(rng, p, line_sites(0, 2), 3);
    auto ev = lindblad::evolve(L, x, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      closed = std::max(closed, ev.values[k].distance(lindblad::partial_semigroup_exact(phi, x, grid[k])));
    }
  }
  r.checks.push_back(at_most("closed form vs generic evolution", closed, 1e-10));

  double worst_rate = 0, worst_r2 = 1;
  const auto tg = range(0.0, 0.25, 6.0);
  for (int i = 0; i < 3; ++i) {
    auto phi = random_state(rng, 2);
    auto L = Lindbladian::partial_state(p, phi);
    auto x = nontrivial(rng, p, line_sites(0, 1), 3);
    auto ev = lindblad::evolve(L, x, tg);
    const auto target = LocalOperator::identity(p, lindblad::ergodic_state(phi, x));
    std::vector<double> vals;
    for (const auto& v : ev.values) vals.push_back(oracle::operator_norm(v - target));
    auto fit = lindblad::decay_rate_fit(tg, vals, {0.1, 0.9999});
    worst_rate = std::max(worst_rate, std::abs(fit.rate - 1.0));
    worst_r2 = std::min(worst_r2, fit.r2);
  }
  r.checks.push_back(at_most("|decay rate - 1|", worst_rate, 1e-3));
  r.checks.push_back(at_least("decay fit r^2", worst_r2, 0.9999));

  double phi0 = 0, phi_small = 0;
  for (int i = 0; i < 3; ++i) {
    auto phi = random_state(rng, 2);
    auto fam = KrausFamily::make({LocalOperator::site_op(p, Site::origin(), 0, 1)}, true);
    auto x = random_operator(rng, p, line_sites(0, 1), 3);
    const Complex ref = lindblad::ergodic_state(phi, x);
    phi0 = std::max(phi0, std::abs(lindblad::perturbed_ergodic_state(phi, fam, 0.0, x).value - ref));
    phi_small = std::max(phi_small, std::abs(lindblad::perturbed_ergodic_state(phi, fam, 1e-9, x).value - ref));
  }
  r.checks.push_back(at_most("Phi^(c=0) - Phi", phi0, 1e-6));
  r.checks.push_back(at_most("Phi^(c=1e-9) - Phi (quadrature path)", phi_small, 1e-6));
  return r;
}

// ---- 5 ----
CriterionResult c5_perturbation(std::uint64_t) {
  CriterionResult r;
  auto p = AlgebraParams::make(2, 1);
  auto phi = StateSpec::diagonal({0.7, 0.3});
  auto fam = KrausFamily::make({LocalOperator::site_op(p, Site::origin(), 0, 1)}, true);
  const auto tg = range(0.0, 0.25, 8.0);
  std::vector<double> worst;
  std::ostringstream table;
  table << "c      rate(U)    rate(V)    rate(UV)   worst";
  for (double c : {0.0, 0.05, 0.1}) {
    auto L = Lindbladian::perturbed(p, phi, fam, c);
    table << '\n' << fmt("%-6.2f", c);
    double w = 1e300;
    for (auto [a, b] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
      auto x = LocalOperator::site_op(p, Site::origin(), a, b);
      auto ev = lindblad::evolve(L, x, tg);
      std::vector<double> vals;
      for (const auto& v : ev.values) vals.push_back(seminorm_one(v));
      auto fit = lindblad::decay_rate_fit(tg, vals, {0.1, 0.999});
      table << ' ' << fmt("%-10.6f", fit.rate);
      w = std::min(w, fit.rate);
    }
    table << ' ' << fmt("%.6f", w);
    worst.push_back(w);
  }
  r.notes.push_back(table.str());
  r.checks.push_back(at_least("worst-case rate positive", *std::min_element(worst.begin(), worst.end()), 1e-6));
  double rise = 0;
  for (std::size_t i = 1; i < worst.size(); ++i) rise = std::max(rise, worst[i] - worst[i - 1]);
  r.checks.push_back(at_most("worst-case rate increase over c", rise, 1e-6,
                             "nonincreasing up to the 1e-6 fit resolution"));
  return r;
}

// ---- 6 ----
CriterionResult c6_lemma(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const auto t0 = std::chrono::steady_clock::now();
  const SiteExponent words[] = {{1, 0}, {0, 1}, {1, 1}};
  auto make_L = [&](int rlen) {
    LocalOperator rop(p);
    while (rop.support().empty()) {
      rop = random_commuting_word_operator(rng, p, words[pick(rng, 3)], line_sites(0, rlen), 2);
    }
    rop *= 1.0 / rop.l1_norm();
    return Lindbladian::translation_covariant(KrausFamily::make({rop}, false));
  };
  double ident = 0;
  for (int i = 0; i < 30; ++i) {
    auto L = make_L(1 + pick(rng, 2));
    auto x = nontrivial(rng, p, line_sites(0, 2), 2);
    const int n = 1 + i % 3;
    auto ks = L.contributing_sites(x.support());
    std::vector<Site> kbar;
    for (int m = 0; m < n; ++m) kbar.push_back(ks[static_cast<std::size_t>(pick(rng, static_cast<int>(ks.size())))]);
    ident = std::max(ident, lindblad::leibniz_expansion_check(L, x, kbar));
  }
  r.checks.push_back(at_most("identity (ii) defect", ident, 1e-12));

  double worst_i = -1e300, worst_iii = -1e300, worst_iv = -1e300;
  for (int i = 0; i < 100; ++i) {
    auto L = make_L(1 + pick(rng, 2));
    auto x = nontrivial(rng, p, line_sites(0, 1 + pick(rng, 2)), 2);
    auto b1 = lindblad::lemma_pure(L, x, 1 + i % 3);
    worst_i = std::max(worst_i, b1.lhs - b1.rhs);
    std::vector<int> eps;
    for (int m = 0; m < 1 + i % 3; ++m) eps.push_back(pick(rng, 3) - 1);
    auto b3 = lindblad::lemma_mixed(L, x, eps);
    worst_iii = std::max(worst_iii, b3.lhs - b3.rhs);
  }
  for (int i = 0; i < 100; ++i) {
    auto L = make_L(1);
    auto x = nontrivial(rng, p, line_sites(0, 1), 2);
    auto y = nontrivial(rng, p, line_sites(pick(rng, 2), 1), 2);
    std::vector<int> eps;
    for (int m = 0; m < 1 + i % 3; ++m) eps.push_back(pick(rng, 3) - 1);
    auto b4 = lindblad::lemma_product(L, x, y, eps, {pick(rng, 3) - 1}, {pick(rng, 3) - 1});
    worst_iv = std::max(worst_iv, b4.lhs - b4.rhs);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.checks.push_back(at_most("bound (i) max(lhs - rhs)", worst_i, 0.0));
  r.checks.push_back(at_most("bound (iii) max(lhs - rhs)", worst_iii, 0.0));
  r.checks.push_back(at_most("bound (iv) max(lhs - rhs)", worst_iv, 0.0));
  r.checks.push_back(at_most("runtime [s]", secs, 60));
  return r;
}

// ---- 7 ----
CriterionResult c7_vacuum(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const auto grid = range(0.0, 0.1, 2.0);
  const auto xs = line_sites(0, 2);
  double unit = 0, vac_j = 0, vac_eta = 0;
  for (int i = 0; i < 10; ++i) {
    // Single-site r keeps the orbit of x inside supp(x), so the window is exact.
    auto rop = normalized(rng, p, line_sites(0, 1), 3, uniform(rng, 0.5, 1.2));
    auto L = i % 2 ? Lindbladian::partial_state(p, random_state(rng, 2))
                   : Lindbladian::translation_covariant(KrausFamily::make({rop}, false));
    auto x = random_operator(rng, p, xs, 3);
    auto sys = fock::build_generator_system(L, SiteWindow(xs), {x});
    auto u = random_operator(rng, p, xs, 2);
    auto v = random_operator(rng, p, xs, 2);
    auto f = random_test_function(rng, sys.noise, 2.0, 4, 0.4);
    auto g = random_test_function(rng, sys.noise, 2.0, 4, 0.4);
    auto F1 = fock::flow_element(sys, LocalOperator::identity(p), u, f, v, g, grid);
    for (const auto& val : F1.values) unit = std::max(unit, std::abs(val - F1.values.front()));

    auto F = fock::flow_element(sys, x, u, {}, v, {}, grid);
    if (i % 2 == 0) {
      auto ev = lindblad::evolve(L, x, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        vac_j = std::max(vac_j, std::abs(F.values[k] - gns_inner(u, ev.values[k] * v)));
      }
    } else {
      const auto& phi = *L.state();
      auto E = fock::eta_product_flow(phi, SiteWindow(xs), x, u, {}, v, {}, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const Complex ref = gns_inner(u, lindblad::partial_semigroup_exact(phi, x, grid[k]) * v);
        vac_eta = std::max(vac_eta, std::abs(E.values[k] - ref));
        vac_eta = std::max(vac_eta, std::abs(F.values[k] - ref));
      }
    }
  }
  r.checks.push_back(at_most("F_t(1) drift", unit, 1e-9));
  r.checks.push_back(at_most("vacuum j_t vs P_t", vac_j, 1e-8));
  r.checks.push_back(at_most("vacuum eta_t vs P_t", vac_eta, 1e-8));
  return r;
}

// ---- 8 ----
CriterionResult c8_homomorphism(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const auto grid = range(0.0, 0.1, 2.0);
  {
    auto phi = random_state(rng, 2);
    auto L = Lindbladian::partial_state(p, phi);
    auto sys = fock::build_generator_system(L, SiteWindow({Site::origin()}));
    auto u = random_operator(rng, p, line_sites(0, 1), 3);
    auto v = random_operator(rng, p, line_sites(0, 1), 3);
    auto f = random_test_function(rng, sys.noise, 2.0, 4, 0.4, 4);
    auto g = random_test_function(rng, sys.noise, 2.0, 4, 0.4, 4);
    double worst = 0, over = 0;
    for (const auto& a : sys.closure.basis) {
      for (const auto& b : sys.closure.basis) {
        auto D = fock::homomorphism_defect(sys, LocalOperator::basis(p, a), LocalOperator::basis(p, b), u, f,
                                           v, g, grid);
        worst = std::max(worst, D.max_defect);
        for (std::size_t k = 0; k < grid.size(); ++k) over = std::max(over, D.defect[k] - D.estimate[k]);
      }
    }
    r.checks.push_back(at_most("single-site eta defect (16 pairs)", worst, 1e-8));
    r.checks.push_back(at_most("single-site defect - estimate", over, 0.0));
  }
  {
    // r = 1/4 U^(0) U^(1) U^(2) U^(3): radius 3 around site 0 is exact, smaller windows leak.
    auto rop = word_string(p, 4, {1, 0}, 0.25);
    auto L = Lindbladian::translation_covariant(KrausFamily::make({rop}, false));
    auto x = LocalOperator::site_op(p, Site::origin(), 0, 1);
    auto y = LocalOperator::site_op(p, Site::origin(), 1, 1);
    auto u = LocalOperator::site_op(p, Site::origin(), 1, 0) + 0.5 * LocalOperator::identity(p);
    auto v = LocalOperator::identity(p);
    std::vector<double> defects;
    double over = 0;
    std::ostringstream note;
    note << "radius  basis  leakage      max defect   max estimate";
    for (int rad = 1; rad <= 3; ++rad) {
      auto W = lindblad::padded_window(x, rad);
      auto sys = fock::build_generator_system(L, W, {x, y, x * y});
      fock::TestFunction f, g;
      for (const auto& j : L.noise_indices(W.sites())) {
        f.set(j, fock::StepFunction::indicator(2.0, 4, 1.0, 0.2));
        g.set(j, fock::StepFunction::indicator(2.0, 4, 1.0, Complex(0, 0.2)));
      }
      auto D = fock::homomorphism_defect(sys, x, y, u, f, v, g, grid);
      defects.push_back(D.max_defect);
      for (std::size_t k = 0; k < grid.size(); ++k) over = std::max(over, D.defect[k] - D.estimate[k]);
      note << '\n'
           << fmt("%-7.0f", rad) << fmt("%-6.0f", static_cast<double>(sys.size())) << ' '
           << fmt("%-12.4g", sys.total_leakage()) << ' ' << fmt("%-12.4g", D.max_defect) << ' '
           << fmt("%.4g", D.max_estimate);
    }
    r.notes.push_back(note.str());
    double rise = -1e300;
    for (std::size_t i = 1; i < defects.size(); ++i) rise = std::max(rise, defects[i] - defects[i - 1]);
    r.checks.push_back(at_most("defect change across radii 1->2->3 (must be < 0)", rise, -1e-12));
    r.checks.push_back(at_most("windowed defect - estimate", over, 0.0));
  }
  return r;
}

// ---- 9 ----
CriterionResult c9_contraction(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  double worst_upper = -1e300, worst_lower = -1e300;
  for (int i = 0; i < 50; ++i) {
    const auto xs = line_sites(0, 1 + pick(rng, 2));
    auto x = random_operator(rng, p, xs, 2);
    auto L = i % 2 ? Lindbladian::partial_state(p, random_state(rng, 2))
                   : Lindbladian::translation_covariant(
                         KrausFamily::make({normalized(rng, p, line_sites(0, 1), 2, uniform(rng, 0.5, 1.2))}, false));
    auto sys = i % 2 ? fock::build_generator_system(L, SiteWindow(xs))
                     : fock::build_generator_system(L, SiteWindow(xs), {op_adjoint(x) * x});
    std::vector<fock::FamilyMember> fam;
    const int size = 2 + pick(rng, 2);
    std::normal_distribution<double> g;
    for (int m = 0; m < size; ++m) {
      fam.push_back({Complex(g(rng), g(rng)), random_operator(rng, p, line_sites(0, 3), 2),
                     m == 0 ? fock::TestFunction{} : random_test_function(rng, sys.noise, 1.0, 2, 0.5)});
    }
    auto c = fock::contraction_check(sys, x, fam, 1.0);
    const double eps = c.error + 1e-9 * std::max(1.0, c.rhs);
    worst_upper = std::max(worst_upper, (c.lhs - c.rhs - eps) / std::max(1.0, c.rhs));
    worst_lower = std::max(worst_lower, -c.lhs - eps);
  }
  r.checks.push_back(at_most("max (lhs - rhs - eps) / max(1, rhs)", worst_upper, 0.0));
  r.checks.push_back(at_most("max (-lhs - eps)", worst_lower, 0.0));
  return r;
}

// ---- 10 ----
CriterionResult c10_covariance(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const auto grid = range(0.0, 0.25, 1.5);
  double ratio = 0, vacuum = 0;
  for (int i = 0; i < 25; ++i) {
    const bool vac = i >= 20;
    auto x = random_operator(rng, p, line_sites(0, 2), 2);
    Lindbladian L = i % 3 == 0 ? Lindbladian::partial_state(p, random_state(rng, 2))
                               : Lindbladian::translation_covariant(KrausFamily::make(
                                     {normalized(rng, p, line_sites(0, 1 + (i % 3 == 2)), 2, 0.6)}, false));
    auto W = lindblad::padded_window(x, L.radius());
    auto modes = L.noise_indices(W.sites());
    auto f = vac ? fock::TestFunction{} : random_test_function(rng, modes, 1.5, 3, 0.3, 4);
    auto g = vac ? fock::TestFunction{} : random_test_function(rng, modes, 1.5, 3, 0.3, 4);
    auto u = random_operator(rng, p, line_sites(0, 2), 2);
    auto v = random_operator(rng, p, line_sites(0, 2), 2);
    const Site j = Site::along(0, pick(rng, 2) ? 1 : -2);
    auto c = fock::covariance_check(L, W, x, u, f, v, g, j, grid);
    if (vac) {
      vacuum = std::max(vacuum, c.deviation);
    } else {
      ratio = std::max(ratio, c.deviation - 2.0 * c.estimate);
    }
  }
  r.checks.push_back(at_most("max (deviation - 2 x estimate)", ratio, 0.0));
  r.checks.push_back(at_most("vacuum deviation", vacuum, 1e-9));
  return r;
}

// ---- 11 ----
CriterionResult c11_ergodicity(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const auto grid = range(0.0, 0.1, 15.0);
  double rate_dev = 0, last = 0, r2 = 1;
  bool fits = true;
  std::string msg;
  for (int i = 0; i < 5; ++i) {
    auto phi = random_state(rng, 2);
    // Traceless per site: each term is a nonidentity label on exactly one site.
    LocalOperator x(p);
    std::normal_distribution<double> g;
    for (int s = 0; s < 1 + i % 2; ++s) {
      for (auto [a, b] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
        x += LocalOperator::site_op(p, Site::along(0, s), a, b, Complex(g(rng), g(rng)));
      }
    }
    x *= 1.0 / x.l1_norm();
    // Dense u, v keep every overlap <u, U_g v> generic.
    auto u = dense_unit_vector(rng, p, line_sites(0, 2));
    auto v = dense_unit_vector(rng, p, line_sites(0, 2));
    std::vector<fock::NoiseMode> modes;
    for (const auto& s : x.support()) {
      for (int m = 0; m < 4; ++m) modes.push_back({s, m});
    }
    fock::TestFunction f, gg;
    for (const auto& m : modes) {
      f.set(m, fock::StepFunction::indicator(15.0, 30, 0.5, Complex(0.3 * g(rng), 0.3 * g(rng))));
      gg.set(m, fock::StepFunction::indicator(15.0, 30, 0.5, Complex(0.3 * g(rng), 0.3 * g(rng))));
    }
    auto scan = fock::eta_ergodicity_scan(phi, x, u, f, v, gg, grid);
    if (!scan.fit_ok) {
      fits = false;
      msg = scan.fit_message;
      continue;
    }
    rate_dev = std::max(rate_dev, std::abs(scan.fit.rate - 1.0));
    r2 = std::min(r2, scan.fit.r2);
    last = std::max(last, scan.values.back());
  }
  r.checks.push_back(flag("rate fits succeed", fits, msg));
  r.checks.push_back(at_most("|rate - 1|", rate_dev, 1e-2));
  r.checks.push_back(at_most("|F_15 - target|", last, 1e-6));
  return r;
}

// ---- 12 ----
CriterionResult c12_uniqueness(std::uint64_t seed) {
  CriterionResult r;
  Rng rng(seed);
  auto p = AlgebraParams::make(2, 1);
  const std::vector<double> grid{0.0, 0.025, 0.05};
  const SiteExponent words[] = {{1, 0}, {0, 1}, {1, 1}};
  double picard_vs_ode = 0, tail = 0, rk = 0;
  int max_depth = 0;
  for (int i = 0; i < 20; ++i) {
    LocalOperator rop(p);
    while (rop.support().empty()) {
      rop = random_commuting_word_operator(rng, p, words[pick(rng, 3)], line_sites(0, 1), 2);
    }
    rop *= 1.0 / rop.l1_norm();
    auto L = Lindbladian::translation_covariant(KrausFamily::make({rop}, false));
    std::normal_distribution<double> g;
    const Complex phase = std::polar(1.0, uniform(rng, 0, 2 * std::numbers::pi));
    auto x = LocalOperator::site_op(p, Site::origin(), pick(rng, 2), 1, phase);
    auto sys = fock::build_generator_system(L, SiteWindow({Site::origin()}), {x});
    auto u = unit_vector(rng, p, line_sites(0, 1), 2);
    auto v = unit_vector(rng, p, line_sites(0, 1), 2);
    auto f = random_test_function(rng, sys.noise, 0.05, 2, 0.3);
    auto gg = random_test_function(rng, sys.noise, 0.05, 2, 0.3);
    fock::FlowOptions po;
    po.method = fock::FlowMethod::picard;
    po.picard_tol = 1e-8;
    auto P = fock::flow_element(sys, x, u, f, v, gg, grid, po);
    auto E = fock::flow_element(sys, x, u, f, v, gg, grid);
    fock::FlowOptions a, b;
    a.method = b.method = fock::FlowMethod::rk4;
    a.substeps = 16;
    b.substeps = 32;
    auto A = fock::flow_element(sys, x, u, f, v, gg, grid, a);
    auto B = fock::flow_element(sys, x, u, f, v, gg, grid, b);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      picard_vs_ode = std::max(picard_vs_ode, std::abs(P.values[k] - E.values[k]));
      rk = std::max(rk, std::abs(A.values[k] - B.values[k]));
    }
    tail = std::max(tail, P.picard_tail);
    max_depth = std::max(max_depth, P.picard_depth);
  }
  r.checks.push_back(at_most("certified Picard tail", tail, 1e-8, "max depth " + std::to_string(max_depth)));
  r.checks.push_back(at_most("picard vs ode", picard_vs_ode, 1e-7));
  r.checks.push_back(at_most("rk4 16 vs 32 substeps", rk, 1e-8));
  return r;
}

// ---- 13 ----
CriterionResult c13_hp(std::uint64_t) {
  CriterionResult r;
  double worst = 0;
  for (int d : {1, 2}) {
    auto p = AlgebraParams::make(2, d);
    auto rop = LocalOperator::site_op(p, Site::origin(), 1, 0);
    auto S = fock::hp_divergence_witness(rop, LocalOperator::identity(p), 10);
    for (int K = 1; K <= 10; ++K) {
      worst = std::max(worst, std::abs(S[static_cast<std::size_t>(K - 1)] - std::pow(2.0 * K + 1, d)));
    }
  }
  r.checks.push_back(at_most("max |S_K - (2K+1)^d|", worst, 0.0));
  return r;
}

}  // namespace

const char* criterion_title(int id) {
  static const char* titles[] = {
      "algebra/oracle equivalence",
      "Lindbladian identities",
      "semigroup correctness",
      "partial-state closed form and decay",
      "perturbation rate table",
      "multi-derivation identity and bounds",
      "flow unitality and vacuum reduction",
      "flow homomorphism",
      "flow contraction",
      "flow covariance",
      "flow ergodicity",
      "Picard/ODE uniqueness",
      "HP divergence witness",
  };
  if (id < 1 || id > kCriterionCount) throw DomainError("criterion id must be 1..13");
  return titles[id - 1];
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  static const std::function<CriterionResult(std::uint64_t)> fns[] = {
      c1_algebra,    c2_identities,   c3_semigroup,   c4_partial_state, c5_perturbation,
      c6_lemma,      c7_vacuum,       c8_homomorphism, c9_contraction,  c10_covariance,
      c11_ergodicity, c12_uniqueness, c13_hp,
  };
  const char* title = criterion_title(id);
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fns[id - 1](seed + static_cast<std::uint64_t>(id));
  } catch (const std::exception& e) {
    r.checks.push_back(flag("engine", false, e.what()));
  }
  r.id = id;
  r.title = title;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = !r.checks.empty();
  for (const auto& c : r.checks) r.pass = r.pass && c.pass;
  return r;
}

std::string format_criterion(const CriterionResult& r) {
  std::ostringstream out;
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %02d %-40s", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str());
  out << head;
  bool first = true;
  for (const auto& c : r.checks) {
    out << (first ? " | " : "; ") << c.name << ' ' << fmt("%.3g", c.measured) << (c.pass ? " ok" : " FAILED");
    if (!c.pass && !c.detail.empty()) out << " (" << c.detail << ')';
    first = false;
  }
  out << " | " << fmt("%.2f", r.seconds) << " s";
  return out.str();
}

}  // namespace uhf::harness
