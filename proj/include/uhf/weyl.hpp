#pragma once

// Exact algebra of local observables on the Z^d lattice, written in the
// clock/shift string basis U_g = prod_j U^(alpha_j) V^(beta_j).

#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uhf/errors.hpp"

namespace uhf {

using Complex = std::complex<double>;

inline constexpr int kMaxLatticeDim = 4;

// Terms with smaller magnitude are removed during canonicalization.
inline constexpr double kCoefficientTolerance = 1e-15;

/// Lattice point of Z^d. Coordinates beyond the algebra's d are kept at zero.
struct Site {
  std::array<std::int64_t, kMaxLatticeDim> coord{};

  static Site origin() { return {}; }
  static Site along(int axis, std::int64_t value) {
    Site s;
    s.coord[static_cast<std::size_t>(axis)] = value;
    return s;
  }
  static Site of(std::initializer_list<std::int64_t> values);

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;
  std::int64_t sup_norm() const;

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;
};

std::string to_string(const Site& s, int d);

/// exp(2 pi i k / N), exact at quarter turns.
Complex root_of_unity(int N, long k);

/// N, d and the powers of omega = exp(2 pi i / N).
class AlgebraParams {
 public:
  static std::shared_ptr<const AlgebraParams> make(int N, int d);

  int N() const { return n_; }
  int d() const { return d_; }
  Complex omega() const { return powers_[1 % n_]; }
  /// omega^k for any integer k.
  Complex omega_pow(long k) const;

  bool same_as(const AlgebraParams& o) const { return n_ == o.n_ && d_ == o.d_; }

 private:
  AlgebraParams(int N, int d);
  int n_;
  int d_;
  std::vector<Complex> powers_;
};

using ParamsPtr = std::shared_ptr<const AlgebraParams>;

struct SiteExponent {
  int alpha = 0;
  int beta = 0;

  bool is_identity() const { return alpha == 0 && beta == 0; }
  auto operator<=>(const SiteExponent&) const = default;
  bool operator==(const SiteExponent&) const = default;
};

/// Finitely supported exponent map g: Z^d -> Z_N x Z_N. The empty label is 1.
class WeylLabel {
 public:
  using Entry = std::pair<Site, SiteExponent>;

  WeylLabel() = default;
  /// Entries may be unsorted and unreduced; (0,0) entries are dropped.
  WeylLabel(std::vector<Entry> entries, int N);
  static WeylLabel single(const Site& s, SiteExponent e, int N);

  const std::vector<Entry>& entries() const { return entries_; }
  bool is_identity() const { return entries_.empty(); }
  /// |g|, the size of the support.
  std::size_t weight() const { return entries_.size(); }
  std::vector<Site> support() const;
  SiteExponent at(const Site& s) const;
  bool contains_site(const Site& s) const;

  WeylLabel translated(const Site& k) const;
  WeylLabel restricted_to(const std::vector<Site>& sites) const;

  auto operator<=>(const WeylLabel&) const = default;
  bool operator==(const WeylLabel&) const = default;

 private:
  std::vector<Entry> entries_;  // sorted by site, no identity entries
};

struct WeylProduct {
  long phase_exponent = 0;  // product equals omega^phase_exponent * U_label
  WeylLabel label;
};

/// U_g U_h = omega^phase U_{g+h}, using U^a V^b U^a' V^b' = omega^(-b a') U^(a+a') V^(b+b').
WeylProduct weyl_mul(const AlgebraParams& p, const WeylLabel& g, const WeylLabel& h);

/// (U_g)^* = omega^phase U_{-g}.
WeylProduct weyl_adjoint(const AlgebraParams& p, const WeylLabel& g);

/// Sign of the commutation phase: U_g U_h = omega^k U_h U_g.
long weyl_commutation_exponent(const AlgebraParams& p, const WeylLabel& g, const WeylLabel& h);

class LocalOperator {
 public:
  using TermMap = std::map<WeylLabel, Complex>;

  explicit LocalOperator(ParamsPtr params) : params_(std::move(params)) {}
  LocalOperator(ParamsPtr params, TermMap terms);

  static LocalOperator zero(ParamsPtr params) { return LocalOperator(std::move(params)); }
  static LocalOperator identity(ParamsPtr params, Complex c = 1.0);
  static LocalOperator basis(ParamsPtr params, const WeylLabel& g, Complex c = 1.0);
  /// c * U^alpha V^beta at a single site.
  static LocalOperator site_op(ParamsPtr params, const Site& s, int alpha, int beta,
                               Complex c = 1.0);

  const AlgebraParams& params() const { return *params_; }
  const ParamsPtr& params_ptr() const { return params_; }
  const TermMap& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  Complex coefficient(const WeylLabel& g) const;
  std::vector<Site> support() const;
  /// |x|, the cardinality of the support.
  std::size_t support_size() const { return support().size(); }
  double l1_norm() const;
  double max_abs_coefficient() const;

  /// Adds c * U_g, dropping the term if it cancels below tolerance.
  void add_term(const WeylLabel& g, Complex c);
  LocalOperator& operator+=(const LocalOperator& o);
  LocalOperator& operator-=(const LocalOperator& o);
  LocalOperator& operator*=(Complex c);

  friend LocalOperator operator+(LocalOperator a, const LocalOperator& b) { return a += b; }
  friend LocalOperator operator-(LocalOperator a, const LocalOperator& b) { return a -= b; }
  friend LocalOperator operator*(Complex c, LocalOperator a) { return a *= c; }
  friend LocalOperator operator*(LocalOperator a, Complex c) { return a *= c; }
  LocalOperator operator-() const;

  /// Exact product (bilinear extension of weyl_mul).
  friend LocalOperator operator*(const LocalOperator& a, const LocalOperator& b);

  bool approx_equal(const LocalOperator& o, double tol) const;
  /// Sup-norm of the coefficient difference.
  double distance(const LocalOperator& o) const;

 private:
  void check_compatible(const LocalOperator& o) const;

  ParamsPtr params_;
  TermMap terms_;
};

LocalOperator op_mul(const LocalOperator& x, const LocalOperator& y);
LocalOperator op_adjoint(const LocalOperator& x);
LocalOperator commutator(const LocalOperator& x, const LocalOperator& y);
LocalOperator anticommutator(const LocalOperator& x, const LocalOperator& y);
LocalOperator translate(const LocalOperator& x, const Site& k);
/// Normalized trace: the coefficient of the identity label.
Complex trace(const LocalOperator& x);
/// <u, v> = tr(u^* v) in L^2(A, tr).
Complex gns_inner(const LocalOperator& u, const LocalOperator& v);
double gns_norm(const LocalOperator& u);
/// theta_n(x) = sum_g |c_g| |g|^n.
double theta(const LocalOperator& x, int n);
/// c_x = |x| (1 + sum_h |c_h|).
double c_const(const LocalOperator& x);

enum class SeminormConvention {
  exponentiated,  // sigma_{j;a,b}(x) = [(U^(j))^a (V^(j))^b, x]
  printed,        // sigma_{j;a,b}(x) = [U^(j) V^(j), x] for every (a, b)
};

/// ||x||_1 = sum_{j, (a,b)} ||sigma_{j;a,b}(x)||, operator norms via dense realization.
double seminorm_one(const LocalOperator& x,
                    SeminormConvention convention = SeminormConvention::exponentiated);

/// Line format: `re im ; site:alpha,beta site:alpha,beta ...`, site = comma-separated coords.
std::string to_text(const LocalOperator& x);
std::string label_to_text(const WeylLabel& g, int d);
LocalOperator parse_operator(const std::string& text, ParamsPtr params);
WeylLabel parse_label(const std::string& text, const AlgebraParams& params);
Site parse_site(const std::string& text, int d);

/// Verifies weyl_mul against dense clock/shift matrices for every single-site pair.
/// Throws Error on disagreement.
void weyl_self_test(const AlgebraParams& params);

}  // namespace uhf
