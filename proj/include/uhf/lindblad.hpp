#pragma once

// Lindblad generators built from translated Kraus families, their structure
// derivations, semigroup evolution and the multi-derivation bound suites.

#include <optional>
#include <vector>

#include "uhf/oracle.hpp"
#include "uhf/weyl.hpp"

namespace uhf::lindblad {

using oracle::SiteWindow;
using oracle::StateSpec;

struct KrausFamily {
  std::vector<LocalOperator> ops;
  bool unital = false;

  /// Throws ConfigError on an empty list, DomainError if `unital` is set but sum a^* a != 1.
  static KrausFamily make(std::vector<LocalOperator> ops, bool unital);
  double theta_sum(int n) const;
  std::vector<Site> support() const;
};

/// On-site Kraus operators of the partial state, as local operators at `site`.
std::vector<LocalOperator> state_kraus_ops(const StateSpec& phi, const ParamsPtr& params,
                                           const Site& site = Site::origin());

enum class GeneratorKind { translation_covariant, partial_state, perturbed };

/// A noise channel of the dilation: the translate k of Kraus member m.
struct NoiseIndex {
  Site k;
  int member = 0;
  auto operator<=>(const NoiseIndex&) const = default;
  bool operator==(const NoiseIndex&) const = default;
};

class Lindbladian {
 public:
  /// L = sum_k tau_k L_0 tau_{-k} with L_0(x) = sum_l (-1/2 {a_l^* a_l, x} + a_l^* x a_l).
  static Lindbladian translation_covariant(KrausFamily family);
  /// L^phi = sum_k (phi_k - id).
  static Lindbladian partial_state(ParamsPtr params, StateSpec phi);
  /// L^phi + c L_family.
  static Lindbladian perturbed(ParamsPtr params, StateSpec phi, KrausFamily family, double c);

  GeneratorKind kind() const { return kind_; }
  double c() const { return c_; }
  const ParamsPtr& params_ptr() const { return params_; }
  const AlgebraParams& params() const { return *params_; }
  /// The translation-covariant family (empty ops for the pure partial-state kind).
  const KrausFamily& family() const { return family_; }
  const std::optional<StateSpec>& state() const { return state_; }

  /// Weighted members placed at the origin; member m carries its weight as sqrt(w) a_m.
  std::size_t member_count() const { return members_.size(); }
  const LocalOperator& member(int m) const { return members_[static_cast<std::size_t>(m)]; }
  const LocalOperator& member_dag(int m) const { return members_dag_[static_cast<std::size_t>(m)]; }
  const LocalOperator& member_dd(int m) const { return members_dd_[static_cast<std::size_t>(m)]; }
  /// Support of the Kraus family that member m belongs to.
  const std::vector<Site>& group_support(int m) const;

  /// The single structure operator r when the generator has exactly one member.
  const LocalOperator& single_r() const;

  std::vector<oracle::KrausTerm> kraus_terms() const;

  /// Translates k for which some member's tau_k support meets `sites`.
  std::vector<Site> contributing_sites(const std::vector<Site>& sites) const;
  /// Noise indices (k, m) with tau_k supp(a_m) meeting `sites`.
  std::vector<NoiseIndex> noise_indices(const std::vector<Site>& sites) const;
  /// Largest sup-norm of a member support site.
  std::int64_t radius() const;
  /// Largest member support size.
  std::size_t member_extent() const;

 private:
  Lindbladian() = default;
  void add_group(const std::vector<LocalOperator>& ops, double weight);

  GeneratorKind kind_ = GeneratorKind::translation_covariant;
  double c_ = 0;
  ParamsPtr params_;
  KrausFamily family_;
  std::optional<StateSpec> state_;
  std::vector<LocalOperator> members_;
  std::vector<LocalOperator> members_dag_;
  std::vector<LocalOperator> members_dd_;
  std::vector<int> member_group_;
  std::vector<std::vector<Site>> group_support_;
};

/// delta_{k,m}(x) = [x, tau_k a_m].
LocalOperator delta(const Lindbladian& L, const NoiseIndex& j, const LocalOperator& x);
/// delta^dag_{k,m}(x) = [tau_k a_m^*, x].
LocalOperator delta_dag(const Lindbladian& L, const NoiseIndex& j, const LocalOperator& x);
/// L_0(x) = -1/2 {T(1), x} + T(x).
LocalOperator lind_zero(const Lindbladian& L, const LocalOperator& x);
/// 1/2 ([r^*, x] r + r^* [x, r]) for a single-member generator.
LocalOperator lind_zero_commutator_form(const Lindbladian& L, const LocalOperator& x);
/// L_k = tau_k L_0 tau_{-k}.
LocalOperator lind_site(const Lindbladian& L, const Site& k, const LocalOperator& x);
/// phi_k(x) - x computed from the state directly.
LocalOperator partial_state_site_map(const StateSpec& phi, const Site& k, const LocalOperator& x);
/// Sum over contributing k. With `interior`, only translates whose family support lies
/// inside the window are kept, which reproduces the interior window generator.
LocalOperator lind_total(const Lindbladian& L, const LocalOperator& x,
                         const SiteWindow* interior = nullptr);

/// L(xy) - x L(y) - L(x) y - sum_j delta^dag_j(x) delta_j(y), max coefficient.
double cocycle_defect(const Lindbladian& L, const LocalOperator& x, const LocalOperator& y);

/// supp(x) (or the origin for x = c 1) padded by the cube [-radius, radius]^d.
SiteWindow padded_window(const LocalOperator& x, std::int64_t radius);

enum class EvolveMethod { series, ode, exact_closed_form, oracle };

const char* to_string(EvolveMethod m);

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::ode;
  double tol = 1e-12;
  /// Empty means supp(x) padded by the generator radius.
  SiteWindow window;
  /// true: interior window generator (no leakage). false: full lattice generator with
  /// images truncated to the window and the dropped mass reported.
  bool interior = true;
  int max_terms = 4000;
  std::size_t max_basis = 20000;
};

struct EvolutionResult {
  std::vector<double> grid;
  std::vector<LocalOperator> values;
  EvolveMethod method = EvolveMethod::ode;
  std::vector<double> error_budget;
  /// Series only: number of Taylor terms used.
  int terms = 0;
};

/// Throws DomainError for negative times, DivergenceError if the series misses `tol`.
EvolutionResult evolve(const Lindbladian& L, const LocalOperator& x, const std::vector<double>& grid,
                       const EvolveOptions& opts = {});

/// Product formula prod_j [phi(W_j) + e^{-t} (W_j - phi(W_j))] extended linearly.
LocalOperator partial_semigroup_exact(const StateSpec& phi, const LocalOperator& x, double t);

/// Phi(x) = sum_g c_g prod_j Tr(rho W_{g_j}).
Complex ergodic_state(const StateSpec& phi, const LocalOperator& x);

struct QuadratureSpec {
  int panels = 1 << 10;
  double tol = 1e-10;
  /// Window for the perturbed evolution; empty means supp(x) padded by the radius.
  SiteWindow window;
};

struct PerturbedState {
  Complex value;
  double error_estimate = 0;
  double t_cut = 0;
  double tail_rate = 0;
};

/// Phi^(c)(x) = Phi(x) + c int_0^inf Phi(L(P^(c)_t x)) dt.
PerturbedState perturbed_ergodic_state(const StateSpec& phi, const KrausFamily& family, double c,
                                       const LocalOperator& x, const QuadratureSpec& quad = {});

struct RateFit {
  double rate = 0;
  double r2 = 0;
  std::size_t points_used = 0;
};

struct RateFitOptions {
  double drop_fraction = 0.1;
  double min_r2 = 0.999;
};

/// Negated least-squares slope of log(value) against t after dropping the transient.
/// Throws FitError for nonpositive values, too few points, or r^2 below min_r2.
RateFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& values,
                       const RateFitOptions& opts = {});

/// eps: -1 -> delta^dag, 0 -> L_k, +1 -> delta.
struct MultiIndex {
  std::vector<Site> kbar;
  std::vector<int> epsbar;
};

/// delta^{eps_n}_{k_n} ... delta^{eps_1}_{k_1}(x); eps_1 is applied first.
LocalOperator multi_derivation(const Lindbladian& L, const LocalOperator& x, const MultiIndex& m);

/// Max coefficient of L_{k_n}...L_{k_1}(x) - 2^{-n} sum_P R(k(P^c))^* delta(k, eps_(P))(x) R(k(P)).
/// Needs a single member whose translates commute.
double leibniz_expansion_check(const Lindbladian& L, const LocalOperator& x,
                               const std::vector<Site>& kbar);

struct LemmaBound {
  double lhs = 0;
  double rhs = 0;
  std::size_t terms = 0;
};

/// max over eps in {-1,1}^n of sum_k ||delta(k, eps)(x)|| against (2 theta_1(r) c_x)^n.
LemmaBound lemma_pure(const Lindbladian& L, const LocalOperator& x, int n);
/// sum_k ||delta(k, eps)(x)|| against ||r||^p (2 theta_1(r) c_x)^n, p = number of zero slots.
LemmaBound lemma_mixed(const Lindbladian& L, const LocalOperator& x, const std::vector<int>& eps);
/// sum ||delta(k, eps){delta(k', eps')(x) delta(k'', eps'')(y)}|| against
/// 2^n (1+||r||)^(2n+m1+m2) (2 theta_1(r) c_{x,y})^(n+m1+m2).
LemmaBound lemma_product(const Lindbladian& L, const LocalOperator& x, const LocalOperator& y,
                         const std::vector<int>& eps, const std::vector<int>& eps_x,
                         const std::vector<int>& eps_y);

}  // namespace uhf::lindblad
