#pragma once

// Matrix elements of the dilation flow between exponential vectors,
//   F_t(y)   = <u e(f), j_t(y) v e(g)>,
//   G_t(x,y) = <j_t(x^*) u e(f), j_t(y) v e(g)>,
// solved as linear ODEs on a finite operator basis.

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "uhf/closure.hpp"
#include "uhf/lindblad.hpp"

namespace uhf::fock {

using lindblad::Lindbladian;
using lindblad::SiteWindow;
using lindblad::StateSpec;
using NoiseMode = lindblad::NoiseIndex;

/// Piecewise constant on a uniform partition of [0, t_max]; zero beyond t_max.
class StepFunction {
 public:
  StepFunction(double t_max, std::vector<Complex> values);
  static StepFunction constant(double t_max, int cells, Complex v);
  /// v on [0, t_end), zero afterwards; t_end is rounded to the cell grid.
  static StepFunction indicator(double t_max, int cells, double t_end, Complex v = 1.0);

  double t_max() const { return t_max_; }
  int cells() const { return static_cast<int>(values_.size()); }
  double dt() const { return t_max_ / cells(); }
  const std::vector<Complex>& values() const { return values_; }
  /// Value on the cell containing t (right-open cells).
  Complex at(double t) const;
  double l2_norm_sq() const;

 private:
  double t_max_;
  std::vector<Complex> values_;
};

/// Finitely many modes keyed by noise index, all on one grid.
class TestFunction {
 public:
  TestFunction() = default;
  static TestFunction zero() { return {}; }

  /// Throws ConfigError if the grid differs from modes already present.
  void set(const NoiseMode& mode, StepFunction f);
  const std::map<NoiseMode, StepFunction>& modes() const { return modes_; }
  bool is_zero() const { return modes_.empty(); }
  Complex at(const NoiseMode& mode, double t) const;
  /// Cell edges of the shared grid (empty for the zero function).
  std::vector<double> edges() const;
  /// ||f(t)||^2 = sum_k |f_k(t)|^2.
  double norm_sq_at(double t) const;
  double l2_norm_sq() const;
  double sup_norm() const;
  /// gamma_f(t0) = int_0^t0 (1 + ||f(s)||^2) ds.
  double gamma(double t0) const;
  /// (f o shift_j)_k = f_{k+j}.
  TestFunction shifted(const Site& j) const;
  /// Modes whose site lies in `sites`.
  TestFunction restricted(const std::vector<Site>& sites) const;
  TestFunction without(const std::vector<Site>& sites) const;

 private:
  std::map<NoiseMode, StepFunction> modes_;
};

/// <e(f), e(g)> = exp(sum_k int conj(f_k) g_k).
Complex exp_inner(const TestFunction& f, const TestFunction& g);

struct FlowGeneratorSystem {
  ParamsPtr params;
  std::shared_ptr<const Lindbladian> generator;
  SiteWindow window;
  std::vector<NoiseMode> noise;
  /// Maps in order: delta_j for each noise index, then delta^dag_j, then L.
  ClosureSystem closure;

  Eigen::Index size() const { return closure.size(); }
  std::size_t noise_count() const { return noise.size(); }
  const kernels::SparseMatrix& D(std::size_t j) const { return closure.matrices[j]; }
  const kernels::SparseMatrix& Dd(std::size_t j) const { return closure.matrices[noise.size() + j]; }
  const kernels::SparseMatrix& L() const { return closure.matrices[2 * noise.size()]; }
  const Eigen::VectorXd& leak_D(std::size_t j) const { return closure.leakage[j]; }
  const Eigen::VectorXd& leak_Dd(std::size_t j) const { return closure.leakage[noise.size() + j]; }
  const Eigen::VectorXd& leak_L() const { return closure.leakage[2 * noise.size()]; }
  double total_leakage() const;
};

/// Orbit closure of the seed labels (plus the identity) inside the window. With no seeds the
/// full window basis is used. Throws SizeError past max_basis.
FlowGeneratorSystem build_generator_system(const Lindbladian& L, const SiteWindow& window,
                                           const std::vector<LocalOperator>& seeds = {},
                                           std::size_t max_basis = 4096,
                                           kernels::Exec exec = kernels::Exec::parallel);

enum class FlowMethod { expm, rk4, picard };

struct FlowOptions {
  FlowMethod method = FlowMethod::expm;
  /// Minimum RK4 substeps per constant-coefficient piece.
  int substeps = 16;
  /// Picard depth; 0 picks the smallest depth with certified tail below picard_tol.
  int picard_depth = 0;
  double picard_tol = 1e-9;
  /// Trajectories whose estimate exceeds this are flagged.
  double leakage_budget = 1e-6;
  kernels::Exec exec = kernels::Exec::parallel;
};

struct MatrixElementTrajectory {
  std::vector<double> grid;
  /// Row i holds F at grid[i] for every basis label.
  Eigen::MatrixXcd rows;
  /// F at grid[i] for the requested observable.
  std::vector<Complex> values;
  std::vector<double> error_estimate;
  /// Per grid point: error bound valid for every basis row (excludes the Picard tail).
  std::vector<double> row_error;
  int picard_depth = 0;
  double picard_tail = 0;
  bool flagged = false;
};

/// ||u e(f)|| ||v e(g)||, the bound on |F(U_z)| for every basis unitary.
double vector_bound(const LocalOperator& u, const TestFunction& f, const LocalOperator& v,
                    const TestFunction& g);

MatrixElementTrajectory flow_element(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                     const LocalOperator& u, const TestFunction& f,
                                     const LocalOperator& v, const TestFunction& g,
                                     const std::vector<double>& grid, const FlowOptions& opts = {});

/// 3^n (t0 c_g)^{n/2} (1+||r||)^n (2 theta_1(r) c_x)^n / sqrt(n!), c_g = 2 e^{gamma_g(t0)} (1+||g||_inf^2).
double picard_error_bound(const LocalOperator& x, const TestFunction& g, double t0, int n,
                          const Lindbladian& L);
/// sum_{m > n} picard_error_bound(m).
double picard_tail_bound(const LocalOperator& x, const TestFunction& g, double t0, int n,
                         const Lindbladian& L);

struct PairTrajectory {
  std::vector<double> grid;
  std::vector<std::pair<LocalOperator, LocalOperator>> pairs;
  /// values[i][p] = G at grid[i] for pairs[p].
  std::vector<std::vector<Complex>> values;
  std::vector<std::vector<double>> error_estimate;
  /// max |G(1, y) - F(y)| over the run.
  double consistency = 0;
};

PairTrajectory pair_element(const FlowGeneratorSystem& sys,
                            const std::vector<std::pair<LocalOperator, LocalOperator>>& pairs,
                            const LocalOperator& u, const TestFunction& f, const LocalOperator& v,
                            const TestFunction& g, const std::vector<double>& grid,
                            const FlowOptions& opts = {});

struct DefectReport {
  double max_defect = 0;
  double max_estimate = 0;
  /// Per grid point.
  std::vector<double> defect;
  std::vector<double> estimate;
};

/// D_t = F_t(xy) - G_t(x, y).
DefectReport homomorphism_defect(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                 const LocalOperator& y, const LocalOperator& u,
                                 const TestFunction& f, const LocalOperator& v,
                                 const TestFunction& g, const std::vector<double>& grid,
                                 const FlowOptions& opts = {});

struct FamilyMember {
  Complex c;
  LocalOperator u;
  TestFunction f;
};

struct ContractionReport {
  double lhs = 0;
  double rhs = 0;
  double error = 0;
  double imag_residual = 0;
};

/// lhs = sum conj(c_i) c_j <u_i e(f_i), j_t(x^* x) u_j e(f_j)>, rhs = ||x||^2 ||xi||^2.
ContractionReport contraction_check(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                    const std::vector<FamilyMember>& family, double t,
                                    const FlowOptions& opts = {});

struct CovarianceReport {
  double deviation = 0;
  double estimate = 0;
};

/// Compares F(x; u, f, v, g) with F(tau_{-j} x; tau_{-j} u, f o shift_j, tau_{-j} v, g o shift_j),
/// each solved on its own (translated) window.
CovarianceReport covariance_check(const Lindbladian& L, const SiteWindow& window,
                                  const LocalOperator& x, const LocalOperator& u,
                                  const TestFunction& f, const LocalOperator& v,
                                  const TestFunction& g, const Site& j,
                                  const std::vector<double>& grid, const FlowOptions& opts = {});

/// Single-site eta flow: partial-state structure maps at site k only.
MatrixElementTrajectory eta_site_flow(const StateSpec& phi, const Site& k, const LocalOperator& x,
                                      const LocalOperator& u, const TestFunction& f,
                                      const LocalOperator& v, const TestFunction& g,
                                      const std::vector<double>& grid, const FlowOptions& opts = {});

/// Product of per-site eta flows over the window, extended linearly over the U_g basis.
/// Throws SizeError when the label expansion exceeds max_products.
MatrixElementTrajectory eta_product_flow(const StateSpec& phi, const SiteWindow& window,
                                         const LocalOperator& x, const LocalOperator& u,
                                         const TestFunction& f, const LocalOperator& v,
                                         const TestFunction& g, const std::vector<double>& grid,
                                         const FlowOptions& opts = {},
                                         std::size_t max_products = 100000);

struct ErgodicityScan {
  std::vector<double> grid;
  std::vector<double> values;
  Complex target;
  bool fit_ok = false;
  lindblad::RateFit fit;
  std::string fit_message;
};

/// |eta_t(x) matrix element - Phi(x) <u e(f), v e(g)>| along the grid, with a decay fit.
ErgodicityScan eta_ergodicity_scan(const StateSpec& phi, const LocalOperator& x,
                                   const LocalOperator& u, const TestFunction& f,
                                   const LocalOperator& v, const TestFunction& g,
                                   const std::vector<double>& grid, const FlowOptions& opts = {});

/// S_K' = sum_{|j|_inf <= K'} ||r_j u||^2 for K' = 1..K.
std::vector<double> hp_divergence_witness(const LocalOperator& r, const LocalOperator& u, int K);

}  // namespace uhf::fock
