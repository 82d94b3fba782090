#include "helpers.hpp"
#include "uhf/closure.hpp"
#include "uhf/kernels.hpp"
#include "uhf/lindblad.hpp"

using namespace uhf;
using namespace testutil;

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(31);
  std::normal_distribution<double> g;
  const Eigen::Index n = 40;
  auto sparse = [&] {
    kernels::SparseMatrix m(n, n);
    std::vector<Eigen::Triplet<Complex>> t;
    for (int i = 0; i < 200; ++i) {
      t.emplace_back(static_cast<int>(rng() % n), static_cast<int>(rng() % n), Complex(g(rng), g(rng)));
    }
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  auto B = sparse();
  std::vector<kernels::SparseMatrix> D{sparse(), sparse()}, Dd{sparse(), sparse()};
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Random(n, n);
  Eigen::MatrixXcd a, b;
  kernels::pair_rhs(B, Dd, D, G, a, kernels::Exec::serial);
  kernels::pair_rhs(B, Dd, D, G, b, kernels::Exec::parallel);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXcd ref = Eigen::MatrixXcd(B).transpose() * G + G * Eigen::MatrixXcd(B);
  for (std::size_t j = 0; j < D.size(); ++j) ref += Eigen::MatrixXcd(Dd[j]).transpose() * G * Eigen::MatrixXcd(D[j]);
  CHECK((a - ref).cwiseAbs().maxCoeff() < 1e-11);

  auto fill = [](Eigen::Index j, Eigen::VectorXcd& col) {
    for (Eigen::Index i = 0; i < col.size(); ++i) col(i) = Complex(static_cast<double>(i * j), 1.0 / (1.0 + j));
  };
  CHECK((kernels::build_columns(7, 9, fill, kernels::Exec::serial) -
         kernels::build_columns(7, 9, fill, kernels::Exec::parallel))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("closure under a generator is exact for single-site structure") {
  auto p = qubit();
  auto L = lindblad::Lindbladian::translation_covariant(lindblad::KrausFamily::make({sx(p)}, false));
  std::vector<LabelMap> maps{[&](const WeylLabel& g) { return lindblad::lind_total(L, LocalOperator::basis(p, g)); }};
  auto inside = [](const WeylLabel& g) { return g.support().size() <= 1 && (g.is_identity() || g.support()[0] == Site::origin()); };
  auto a = build_closure({WeylLabel::single(Site::origin(), {0, 1}, 2)}, maps, inside, 100, kernels::Exec::serial);
  auto b = build_closure({WeylLabel::single(Site::origin(), {0, 1}, 2)}, maps, inside, 100, kernels::Exec::parallel);
  CHECK(a.basis == b.basis);
  CHECK(a.leakage[0].sum() == 0.0);
  CHECK(Eigen::MatrixXcd(a.matrices[0]).isApprox(Eigen::MatrixXcd(b.matrices[0])));
  CHECK_THROWS_AS(build_closure({WeylLabel::single(Site::origin(), {0, 1}, 2)}, maps, inside, 0), SizeError);
}
