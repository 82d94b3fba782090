#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "uhf/lindblad.hpp"

using namespace uhf;
using namespace testutil;
using oracle::Matrix;
using oracle::SiteWindow;

TEST_CASE("clock and shift matrices") {
  auto [U, V] = oracle::clock_shift_matrices(2);
  Matrix sxm(2, 2), szm(2, 2);
  sxm << 0, 1, 1, 0;
  szm << 1, 0, 0, -1;
  CHECK(mdiff(U, sxm) == 0.0);
  CHECK(mdiff(V, szm) < 1e-15);
  for (int N : {2, 3, 4}) {
    auto [u, v] = oracle::clock_shift_matrices(N);
    CHECK(mdiff(u * u.adjoint(), Matrix::Identity(N, N)) < 1e-15);
    CHECK(mdiff(v * v.adjoint(), Matrix::Identity(N, N)) < 1e-15);
    CHECK(mdiff(u * v, root_of_unity(N, 1) * v * u) < 1e-14);
  }
}

TEST_CASE("realize examples") {
  auto p = qubit();
  SiteWindow w0({Site::origin()});
  Matrix expect(2, 2);
  expect << 0, -1, 1, 0;
  CHECK(mdiff(oracle::realize(LocalOperator::site_op(p, Site::origin(), 1, 1), w0).matrix, expect) < 1e-15);
  SiteWindow w3(line_sites(-1, 3));
  CHECK(mdiff(oracle::realize(one(p), w3).matrix, Matrix::Identity(8, 8)) == 0.0);
  CHECK_THROWS_AS(oracle::realize(sx(p, 5), w3), WindowError);
}

TEST_CASE("operator norm examples") {
  auto p = qubit();
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    auto g = LocalOperator::basis(p, random_label(rng, *p, line_sites(0, 3)));
    CHECK(oracle::operator_norm(g) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(oracle::operator_norm(sx(p) + sz(p)) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
  CHECK(oracle::operator_norm(2.0 * one(p)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("decompose inverts realize and trace matches") {
  Rng rng(12);
  auto p = qubit();
  SiteWindow w(line_sites(0, 3));
  for (int i = 0; i < 20; ++i) {
    auto x = random_operator(rng, p, line_sites(0, 3), 5);
    auto X = oracle::realize(x, w).matrix;
    CHECK(oracle::decompose(X, w, p).distance(x) < 1e-13);
    CHECK(std::abs(X.trace() / 8.0 - trace(x)) < 1e-13);
    const Site k = Site::along(0, 4);
    CHECK(mdiff(oracle::realize(translate(x, k), w.translated(k)).matrix, X) < 1e-14);
    auto y = random_operator(rng, p, line_sites(0, 3), 5);
    CHECK(oracle::devectorize(oracle::vectorize(y, oracle::window_basis(*p, w)), oracle::window_basis(*p, w), p)
              .distance(y) == 0.0);
  }
}

TEST_CASE("superoperator of the single-site partial-state generator") {
  auto p = qubit();
  auto L = lindblad::Lindbladian::partial_state(p, oracle::StateSpec::maximally_mixed(2));
  SiteWindow w({Site::origin()});
  auto S = oracle::superoperator(L.kraus_terms(), p, w);
  Eigen::ComplexEigenSolver<Matrix> es(S);
  std::vector<double> ev;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-12);
    ev.push_back(es.eigenvalues()(i).real());
  }
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(-1.0));
  CHECK(ev[2] == doctest::Approx(-1.0));
  CHECK(std::abs(ev[3]) < 1e-12);
  auto basis = oracle::window_basis(*p, w);
  CHECK((S * oracle::vectorize(one(p), basis)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("interior superoperator agrees with the symbolic generator") {
  Rng rng(13);
  auto p = qubit();
  for (int i = 0; i < 10; ++i) {
    auto r = nontrivial(rng, p, line_sites(0, 2), 2);
    auto L = lindblad::Lindbladian::translation_covariant(lindblad::KrausFamily::make({r}, false));
    SiteWindow w(line_sites(-1, 3));
    auto S = oracle::superoperator(L.kraus_terms(), p, w, oracle::Closure::interior);
    auto basis = oracle::window_basis(*p, w);
    auto x = random_operator(rng, p, line_sites(0, 1), 3);
    auto got = oracle::devectorize(S * oracle::vectorize(x, basis), basis, p);
    CHECK(got.distance(lindblad::lind_total(L, x, &w)) < 1e-12);
    auto Sp = oracle::superoperator(L.kraus_terms(), p, w, oracle::Closure::interior, kernels::Exec::serial);
    CHECK(mdiff(S, Sp) == 0.0);
  }
}

TEST_CASE("expm_evolve basics") {
  auto p = qubit();
  auto L = lindblad::Lindbladian::partial_state(p, oracle::StateSpec::maximally_mixed(2));
  SiteWindow w({Site::origin()});
  auto S = oracle::superoperator(L.kraus_terms(), p, w);
  auto basis = oracle::window_basis(*p, w);
  auto v = oracle::vectorize(sx(p), basis);
  CHECK((oracle::expm_evolve(S, 0.0, v) - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((oracle::expm_evolve(S, 0.7, v) - std::exp(-0.7) * v).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(oracle::expm_evolve(S, -1.0, v), DomainError);
}

TEST_CASE("state Kraus operators") {
  auto p = qubit();
  auto [U, V] = oracle::clock_shift_matrices(2);
  {
    auto K = oracle::state_kraus(oracle::StateSpec::maximally_mixed(2));
    CHECK(K.size() == 4);
    Matrix s = Matrix::Zero(2, 2);
    for (const auto& k : K) s += k.adjoint() * V * k;
    CHECK(s.cwiseAbs().maxCoeff() < 1e-15);
  }
  {
    auto K = oracle::state_kraus(oracle::StateSpec::diagonal({1.0, 0.0}));
    Matrix x(2, 2);
    x << Complex(0.3, 0.1), 2.0, -1.0, 5.0;
    Matrix s = Matrix::Zero(2, 2);
    for (const auto& k : K) s += k.adjoint() * x * k;
    CHECK(mdiff(s, x(0, 0) * Matrix::Identity(2, 2)) < 1e-15);
  }
  Rng rng(14);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    Matrix a(3, 3);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(r, c) = Complex(g(rng), g(rng));
    }
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint());
    auto K = oracle::state_kraus(oracle::StateSpec(rho));
    Matrix s = Matrix::Zero(3, 3);
    for (const auto& k : K) s += k.adjoint() * k;
    CHECK(mdiff(s, Matrix::Identity(3, 3)) < 1e-12);
  }
}

TEST_CASE("state validation") {
  Matrix bad(2, 2);
  bad << 1.0, 0, 0, 1.0;
  CHECK_THROWS_AS(oracle::StateSpec{bad}, StateError);
  Matrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(oracle::StateSpec{neg}, StateError);
}

TEST_CASE("Choi matrix of the windowed semigroup is PSD") {
  Rng rng(15);
  auto p = qubit();
  SiteWindow w(line_sites(0, 2));
  auto basis = oracle::window_basis(*p, w);
  for (int i = 0; i < 4; ++i) {
    auto r = nontrivial(rng, p, line_sites(0, 2), 3);
    auto L = lindblad::Lindbladian::translation_covariant(lindblad::KrausFamily::make({(1.0 / r.l1_norm()) * r}, false));
    auto S = oracle::superoperator(L.kraus_terms(), p, w, oracle::Closure::interior);
    for (double t : {0.1, 0.5, 1.0}) {
      Matrix T(basis.size(), basis.size());
      for (std::size_t c = 0; c < basis.size(); ++c) {
        oracle::Vector e = oracle::Vector::Zero(static_cast<Eigen::Index>(basis.size()));
        e(static_cast<Eigen::Index>(c)) = 1.0;
        T.col(static_cast<Eigen::Index>(c)) = oracle::expm_evolve(S, t, e);
      }
      CHECK(oracle::min_hermitian_eigenvalue(oracle::choi_matrix(T, basis, w, p)) >= -1e-9);
    }
  }
}
