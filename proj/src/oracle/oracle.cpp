#include "uhf/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unsupported/Eigen/MatrixFunctions>

namespace uhf::oracle {

SiteWindow::SiteWindow(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::set<Site> seen(sites_.begin(), sites_.end());
  if (seen.size() != sites_.size()) throw WindowError("window lists a site twice");
}

long SiteWindow::dim(int N) const {
  long d = 1;
  for (std::size_t i = 0; i < sites_.size(); ++i) d *= N;
  return d;
}

bool SiteWindow::contains(const Site& s) const { return index_of(s) >= 0; }

bool SiteWindow::contains(const WeylLabel& g) const {
  for (const auto& e : g.entries()) {
    if (!contains(e.first)) return false;
  }
  return true;
}

int SiteWindow::index_of(const Site& s) const {
  auto it = std::find(sites_.begin(), sites_.end(), s);
  return it == sites_.end() ? -1 : static_cast<int>(it - sites_.begin());
}

SiteWindow SiteWindow::translated(const Site& k) const {
  std::vector<Site> out;
  out.reserve(sites_.size());
  for (const auto& s : sites_) out.push_back(s + k);
  return SiteWindow(std::move(out));
}

bool DenseOperator::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_unitary(double tol) const {
  Matrix id = Matrix::Identity(matrix.rows(), matrix.cols());
  return (matrix * matrix.adjoint() - id).cwiseAbs().maxCoeff() <= tol;
}

StateSpec::StateSpec(Matrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 2) throw StateError("rho must be square, N >= 2");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw StateError("rho is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-12) throw StateError("rho does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_);
  if (es.eigenvalues().minCoeff() < -1e-12) throw StateError("rho is not positive semidefinite");
}

StateSpec StateSpec::maximally_mixed(int N) {
  return StateSpec(Matrix::Identity(N, N) / static_cast<double>(N));
}

StateSpec StateSpec::diagonal(const std::vector<double>& probs) {
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(probs.size()),
                            static_cast<Eigen::Index>(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = probs[i];
  }
  return StateSpec(rho);
}

std::pair<Matrix, Matrix> clock_shift_matrices(int N) {
  if (N < 2) throw ConfigError("N must be at least 2");
  Matrix U = Matrix::Zero(N, N);
  Matrix V = Matrix::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    U((j + 1) % N, j) = 1.0;
    V(j, j) = root_of_unity(N, -j);
  }
  return {U, V};
}

Matrix site_matrix(int N, int alpha, int beta) {
  auto [U, V] = clock_shift_matrices(N);
  Matrix out = Matrix::Identity(N, N);
  for (int i = 0; i < alpha; ++i) out = out * U;
  for (int i = 0; i < beta; ++i) out = out * V;
  return out;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void require_inside(const WeylLabel& g, const SiteWindow& window) {
  if (!window.contains(g)) throw WindowError("operator support lies outside the window");
}

// Per-site factor cache for one call.
class FactorTable {
 public:
  explicit FactorTable(int N) : n_(N), table_(static_cast<std::size_t>(N * N)) {
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) table_[static_cast<std::size_t>(a * N + b)] = site_matrix(N, a, b);
    }
  }
  const Matrix& at(SiteExponent e) const {
    return table_[static_cast<std::size_t>(e.alpha * n_ + e.beta)];
  }

 private:
  int n_;
  std::vector<Matrix> table_;
};

Matrix realize_label_with(const FactorTable& table, const WeylLabel& g, const SiteWindow& window) {
  require_inside(g, window);
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& s : window.sites()) out = kron(out, table.at(g.at(s)));
  return out;
}

}  // namespace

Matrix realize_label(const AlgebraParams& p, const WeylLabel& g, const SiteWindow& window) {
  FactorTable table(p.N());
  return realize_label_with(table, g, window);
}

DenseOperator realize(const LocalOperator& x, const SiteWindow& window) {
  const int N = x.params().N();
  const long dim = window.dim(N);
  FactorTable table(N);
  DenseOperator out{window, Matrix::Zero(dim, dim)};
  for (const auto& [g, c] : x.terms()) out.matrix += c * realize_label_with(table, g, window);
  return out;
}

std::vector<WeylLabel> window_basis(const AlgebraParams& p, const SiteWindow& window) {
  const int N = p.N();
  const long per_site = static_cast<long>(N) * N;
  long total = 1;
  for (std::size_t i = 0; i < window.size(); ++i) {
    total *= per_site;
    if (total > kMaxSuperoperatorDim * 16) throw SizeError("window basis too large");
  }
  std::vector<WeylLabel> out;
  out.reserve(static_cast<std::size_t>(total));
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    std::vector<WeylLabel::Entry> entries;
    for (const auto& s : window.sites()) {
      int code = static_cast<int>(rest % per_site);
      rest /= per_site;
      entries.push_back({s, {code / N, code % N}});
    }
    out.emplace_back(std::move(entries), N);
  }
  std::sort(out.begin(), out.end());
  return out;
}

LocalOperator decompose(const Matrix& y, const SiteWindow& window, const ParamsPtr& params) {
  const long dim = window.dim(params->N());
  if (y.rows() != dim || y.cols() != dim) throw WindowError("matrix does not match window dimension");
  FactorTable table(params->N());
  LocalOperator out(params);
  for (const auto& g : window_basis(*params, window)) {
    Matrix ug = realize_label_with(table, g, window);
    Complex c = (ug.adjoint() * y).trace() / static_cast<double>(dim);
    out.add_term(g, c);
  }
  return out;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // Largest eigenvalue of m^* m; much cheaper than a full SVD at the window sizes used here.
  Matrix g = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double operator_norm(const LocalOperator& x) {
  auto supp = x.support();
  if (supp.empty()) return std::abs(trace(x));
  return operator_norm(realize(x, SiteWindow(supp)).matrix);
}

Vector vectorize(const LocalOperator& x, const std::vector<WeylLabel>& basis) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  std::size_t matched = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Complex c = x.coefficient(basis[i]);
    if (c != Complex{}) {
      v(static_cast<Eigen::Index>(i)) = c;
      ++matched;
    }
  }
  if (matched != x.term_count()) throw WindowError("operator has labels outside the basis");
  return v;
}

LocalOperator devectorize(const Vector& v, const std::vector<WeylLabel>& basis,
                          const ParamsPtr& params) {
  LocalOperator out(params);
  for (std::size_t i = 0; i < basis.size(); ++i) out.add_term(basis[i], v(static_cast<Eigen::Index>(i)));
  return out;
}

namespace {

std::vector<Site> family_support(const KrausTerm& term) {
  std::set<Site> s;
  for (const auto& op : term.ops) {
    for (const auto& site : op.support()) s.insert(site);
  }
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<Site> window_translates(const KrausTerm& term, const SiteWindow& window,
                                    Closure closure) {
  auto fam = family_support(term);
  if (fam.empty()) return {};
  std::set<Site> candidates;
  for (const auto& w : window.sites()) {
    for (const auto& f : fam) candidates.insert(w - f);
  }
  std::vector<Site> out;
  for (const auto& k : candidates) {
    bool all_in = true;
    for (const auto& f : fam) all_in = all_in && window.contains(f + k);
    if (closure == Closure::clipped || all_in) out.push_back(k);
  }
  return out;
}

Matrix superoperator(const std::vector<KrausTerm>& terms, const ParamsPtr& params,
                     const SiteWindow& window, Closure closure, kernels::Exec exec) {
  if (window.empty()) throw WindowError("superoperator needs a nonempty window");
  const int N = params->N();
  long nb = 1;
  for (std::size_t i = 0; i < window.size(); ++i) {
    nb *= static_cast<long>(N) * N;
    if (nb > kMaxSuperoperatorDim) {
      throw SizeError("superoperator dimension N^(2|window|) exceeds " +
                      std::to_string(kMaxSuperoperatorDim));
    }
  }
  FactorTable table(N);
  struct DenseKraus {
    Matrix k;
    Matrix kdk;
  };
  std::vector<DenseKraus> kraus;
  for (const auto& term : terms) {
    for (const auto& k : window_translates(term, window, closure)) {
      for (const auto& op : term.ops) {
        LocalOperator shifted(params);
        for (const auto& [g, c] : op.terms()) {
          // Clipped closure drops the factors that fall outside the window.
          shifted.add_term(g.translated(k).restricted_to(window.sites()), c);
        }
        Matrix m = std::sqrt(term.weight) * realize(shifted, window).matrix;
        kraus.push_back({m, m.adjoint() * m});
      }
    }
  }
  auto basis = window_basis(*params, window);
  std::vector<Matrix> realized;
  realized.reserve(basis.size());
  for (const auto& g : basis) realized.push_back(realize_label_with(table, g, window));
  const double dim = static_cast<double>(window.dim(N));
  const auto n = static_cast<Eigen::Index>(basis.size());
  return kernels::build_columns(
      n, n,
      [&](Eigen::Index j, Eigen::VectorXcd& col) {
        const Matrix& x = realized[static_cast<std::size_t>(j)];
        Matrix y = Matrix::Zero(x.rows(), x.cols());
        for (const auto& kr : kraus) {
          y += kr.k.adjoint() * x * kr.k - 0.5 * (kr.kdk * x + x * kr.kdk);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          col(i) = (realized[static_cast<std::size_t>(i)].adjoint() * y).trace() / dim;
        }
      },
      exec);
}

Vector expm_evolve(const Matrix& superop, double t, const Vector& x) {
  if (t < 0) throw DomainError("evolution time must be nonnegative");
  if (t == 0) return x;
  Matrix scaled = t * superop;
  Matrix e = scaled.exp();
  return e * x;
}

std::vector<Matrix> state_kraus(const StateSpec& state) {
  const int N = state.N();
  Eigen::SelfAdjointEigenSolver<Matrix> es(state.rho());
  std::vector<Matrix> out;
  for (int i = 0; i < N; ++i) {
    double p = es.eigenvalues()(i);
    if (p <= 1e-14) continue;
    Vector v = es.eigenvectors().col(i);
    for (int j = 0; j < N; ++j) {
      Matrix k = Matrix::Zero(N, N);
      k.col(j) = std::sqrt(p) * v;
      out.push_back(k);
    }
  }
  return out;
}

Matrix choi_matrix(const Matrix& transfer, const std::vector<WeylLabel>& basis,
                   const SiteWindow& window, const ParamsPtr& params) {
  const long dim = window.dim(params->N());
  FactorTable table(params->N());
  std::vector<Matrix> realized;
  for (const auto& g : basis) realized.push_back(realize_label_with(table, g, window));
  Matrix choi = Matrix::Zero(dim * dim, dim * dim);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      // E_ij = sum_g c_g U_g with c_g = conj((U_g)_ij) / dim.
      Vector c(nb);
      for (Eigen::Index b = 0; b < nb; ++b) {
        c(b) = std::conj(realized[static_cast<std::size_t>(b)](i, j)) / static_cast<double>(dim);
      }
      Vector tc = transfer * c;
      Matrix img = Matrix::Zero(dim, dim);
      for (Eigen::Index b = 0; b < nb; ++b) img += tc(b) * realized[static_cast<std::size_t>(b)];
      choi.block(i * dim, j * dim, dim, dim) = img;
    }
  }
  return choi;
}

double min_hermitian_eigenvalue(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void write_csv(std::ostream& out, const Matrix& m) {
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j).real() << ',' << m(i, j).imag();
    }
    out << '\n';
  }
}

}  // namespace uhf::oracle

namespace uhf {

double seminorm_one(const LocalOperator& x, SeminormConvention convention) {
  const int N = x.params().N();
  double total = 0;
  for (const auto& j : x.support()) {
    double printed_norm = -1;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        if (a == 0 && b == 0) continue;
        if (convention == SeminormConvention::printed) {
          if (printed_norm < 0) {
            auto s = LocalOperator::site_op(x.params_ptr(), j, 1, 1);
            printed_norm = oracle::operator_norm(commutator(s, x));
          }
          total += printed_norm;
        } else {
          auto s = LocalOperator::site_op(x.params_ptr(), j, a, b);
          total += oracle::operator_norm(commutator(s, x));
        }
      }
    }
  }
  return total;
}

void weyl_self_test(const AlgebraParams& params) {
  const int N = params.N();
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      for (int a2 = 0; a2 < N; ++a2) {
        for (int b2 = 0; b2 < N; ++b2) {
          auto g = WeylLabel::single(Site::origin(), {a, b}, N);
          auto h = WeylLabel::single(Site::origin(), {a2, b2}, N);
          auto prod = weyl_mul(params, g, h);
          oracle::Matrix lhs = oracle::site_matrix(N, a, b) * oracle::site_matrix(N, a2, b2);
          SiteExponent e = prod.label.at(Site::origin());
          oracle::Matrix rhs = params.omega_pow(prod.phase_exponent) * oracle::site_matrix(N, e.alpha, e.beta);
          if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12) {
            throw Error("phase convention self-test failed at N=" + std::to_string(N));
          }
        }
      }
    }
  }
}

}  // namespace uhf
