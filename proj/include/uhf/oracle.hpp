#pragma once

// Brute-force dense realization on finite site windows. Everything here is
// computed from explicit matrices and serves as the reference for the
// symbolic engines.

#include <Eigen/Dense>
#include <iosfwd>
#include <utility>
#include <vector>

#include "uhf/kernels.hpp"
#include "uhf/weyl.hpp"

namespace uhf::oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Superoperators with more basis elements than this are refused.
inline constexpr long kMaxSuperoperatorDim = 10000;

/// Ordered list of distinct sites; the first site is the most significant tensor factor.
class SiteWindow {
 public:
  SiteWindow() = default;
  explicit SiteWindow(std::vector<Site> sites);
  static SiteWindow covering(const std::vector<Site>& sites) { return SiteWindow(sites); }

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  long dim(int N) const;
  bool contains(const Site& s) const;
  bool contains(const WeylLabel& g) const;
  /// Position of s in the window, or -1.
  int index_of(const Site& s) const;
  SiteWindow translated(const Site& k) const;

 private:
  std::vector<Site> sites_;
};

struct DenseOperator {
  SiteWindow window;
  Matrix matrix;

  bool is_hermitian(double tol = 1e-12) const;
  bool is_unitary(double tol = 1e-12) const;
};

/// On-site density matrix.
class StateSpec {
 public:
  /// Throws StateError unless rho is Hermitian, PSD to -1e-12 and unit trace to 1e-12.
  explicit StateSpec(Matrix rho);
  static StateSpec maximally_mixed(int N);
  static StateSpec diagonal(const std::vector<double>& probs);

  const Matrix& rho() const { return rho_; }
  int N() const { return static_cast<int>(rho_.rows()); }
  /// Tr(rho W) for a single-site matrix W.
  Complex expectation(const Matrix& w) const { return (rho_ * w).trace(); }

 private:
  Matrix rho_;
};

/// U shifts |j> to |j+1>, V = diag(omega^{-j}); UV = omega VU.
std::pair<Matrix, Matrix> clock_shift_matrices(int N);
/// U^alpha V^beta.
Matrix site_matrix(int N, int alpha, int beta);

DenseOperator realize(const LocalOperator& x, const SiteWindow& window);
/// U_g realized on the window (g must be supported in it).
Matrix realize_label(const AlgebraParams& p, const WeylLabel& g, const SiteWindow& window);
/// Hilbert-Schmidt projection onto the U_g basis: c_g = tr(U_g^* Y) / dim.
LocalOperator decompose(const Matrix& y, const SiteWindow& window, const ParamsPtr& params);

double operator_norm(const LocalOperator& x);
double operator_norm(const Matrix& m);

/// All N^(2|window|) labels supported in the window, in WeylLabel order.
std::vector<WeylLabel> window_basis(const AlgebraParams& p, const SiteWindow& window);

Vector vectorize(const LocalOperator& x, const std::vector<WeylLabel>& basis);
LocalOperator devectorize(const Vector& v, const std::vector<WeylLabel>& basis,
                          const ParamsPtr& params);

/// One weighted Kraus family placed at the origin and summed over all lattice translates.
struct KrausTerm {
  std::vector<LocalOperator> ops;
  double weight = 1.0;
};

enum class Closure { interior, clipped };

/// Translates k whose family support lies inside the window (interior) or meets it (clipped).
std::vector<Site> window_translates(const KrausTerm& term, const SiteWindow& window,
                                    Closure closure);

/// Dense generator matrix in the window's U_g basis; column j holds L(U_{b_j}).
Matrix superoperator(const std::vector<KrausTerm>& terms, const ParamsPtr& params,
                     const SiteWindow& window, Closure closure = Closure::interior,
                     kernels::Exec exec = kernels::Exec::parallel);

/// e^{tL} x on coefficient vectors. Throws DomainError for t < 0.
Vector expm_evolve(const Matrix& superop, double t, const Vector& x);

/// Kraus operators K_ij = sqrt(p_i)|v_i><j| with sum K^* x K = Tr(rho x) 1.
std::vector<Matrix> state_kraus(const StateSpec& state);

/// Choi matrix sum_ij E_ij (x) Phi(E_ij) of the map with U_g-basis transfer matrix `transfer`.
Matrix choi_matrix(const Matrix& transfer, const std::vector<WeylLabel>& basis,
                   const SiteWindow& window, const ParamsPtr& params);

double min_hermitian_eigenvalue(const Matrix& m);

/// Row-major CSV, each entry written as `re,im`.
void write_csv(std::ostream& out, const Matrix& m);

}  // namespace uhf::oracle
