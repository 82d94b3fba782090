#include "uhf/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace uhf {

namespace {

int mod_n(long v, int n) {
  long r = v % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

Site Site::of(std::initializer_list<std::int64_t> values) {
  if (values.size() > static_cast<std::size_t>(kMaxLatticeDim)) {
    throw ConfigError("site has more coordinates than the supported lattice dimension");
  }
  Site s;
  std::size_t i = 0;
  for (auto v : values) s.coord[i++] = v;
  return s;
}

Site Site::operator+(const Site& o) const {
  Site s;
  for (std::size_t i = 0; i < coord.size(); ++i) s.coord[i] = coord[i] + o.coord[i];
  return s;
}

Site Site::operator-(const Site& o) const {
  Site s;
  for (std::size_t i = 0; i < coord.size(); ++i) s.coord[i] = coord[i] - o.coord[i];
  return s;
}

Site Site::operator-() const { return Site{} - *this; }

std::int64_t Site::sup_norm() const {
  std::int64_t m = 0;
  for (auto c : coord) m = std::max<std::int64_t>(m, c < 0 ? -c : c);
  return m;
}

std::string to_string(const Site& s, int d) {
  std::string out;
  for (int i = 0; i < d; ++i) {
    if (i) out += ',';
    out += std::to_string(s.coord[static_cast<std::size_t>(i)]);
  }
  return out;
}

Complex root_of_unity(int N, long k) {
  const int m = mod_n(k, N);
  // Exact values at the quarter turns keep N = 2, 4 phases free of rounding.
  if ((4 * m) % N == 0) {
    static const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return quarter[(4 * m / N) % 4];
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * m / N);
}

AlgebraParams::AlgebraParams(int N, int d) : n_(N), d_(d), powers_(static_cast<std::size_t>(N)) {
  for (int k = 0; k < N; ++k) powers_[static_cast<std::size_t>(k)] = root_of_unity(N, k);
}

std::shared_ptr<const AlgebraParams> AlgebraParams::make(int N, int d) {
  if (N < 2) throw ConfigError("N must be at least 2");
  if (d < 1 || d > kMaxLatticeDim) {
    throw ConfigError("lattice dimension d must lie in [1, " + std::to_string(kMaxLatticeDim) + "]");
  }
  std::shared_ptr<const AlgebraParams> p(new AlgebraParams(N, d));
  weyl_self_test(*p);
  return p;
}

Complex AlgebraParams::omega_pow(long k) const {
  return powers_[static_cast<std::size_t>(mod_n(k, n_))];
}

WeylLabel::WeylLabel(std::vector<Entry> entries, int N) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (auto& [site, e] : entries) {
    if (!entries_.empty() && entries_.back().first == site) {
      auto& acc = entries_.back().second;
      acc.alpha = mod_n(acc.alpha + e.alpha, N);
      acc.beta = mod_n(acc.beta + e.beta, N);
    } else {
      entries_.push_back({site, {mod_n(e.alpha, N), mod_n(e.beta, N)}});
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second.is_identity(); });
}

WeylLabel WeylLabel::single(const Site& s, SiteExponent e, int N) {
  return WeylLabel({{s, e}}, N);
}

std::vector<Site> WeylLabel::support() const {
  std::vector<Site> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

SiteExponent WeylLabel::at(const Site& s) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const Entry& e, const Site& v) { return e.first < v; });
  if (it != entries_.end() && it->first == s) return it->second;
  return {};
}

bool WeylLabel::contains_site(const Site& s) const { return !at(s).is_identity(); }

WeylLabel WeylLabel::translated(const Site& k) const {
  WeylLabel out;
  out.entries_ = entries_;
  for (auto& e : out.entries_) e.first = e.first + k;
  return out;
}

WeylLabel WeylLabel::restricted_to(const std::vector<Site>& sites) const {
  WeylLabel out;
  for (const auto& e : entries_) {
    if (std::find(sites.begin(), sites.end(), e.first) != sites.end()) out.entries_.push_back(e);
  }
  return out;
}

WeylProduct weyl_mul(const AlgebraParams& p, const WeylLabel& g, const WeylLabel& h) {
  const int n = p.N();
  const auto& a = g.entries();
  const auto& b = h.entries();
  std::vector<WeylLabel::Entry> merged;
  merged.reserve(a.size() + b.size());
  long phase = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      merged.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      merged.push_back(b[j++]);
    } else {
      const auto& e1 = a[i].second;
      const auto& e2 = b[j].second;
      phase -= static_cast<long>(e1.beta) * e2.alpha;
      merged.push_back({a[i].first, {e1.alpha + e2.alpha, e1.beta + e2.beta}});
      ++i;
      ++j;
    }
  }
  return {mod_n(phase, n), WeylLabel(std::move(merged), n)};
}

WeylProduct weyl_adjoint(const AlgebraParams& p, const WeylLabel& g) {
  const int n = p.N();
  std::vector<WeylLabel::Entry> neg;
  neg.reserve(g.weight());
  long phase = 0;
  for (const auto& [site, e] : g.entries()) {
    phase -= static_cast<long>(e.alpha) * e.beta;
    neg.push_back({site, {n - e.alpha, n - e.beta}});
  }
  return {mod_n(phase, n), WeylLabel(std::move(neg), n)};
}

long weyl_commutation_exponent(const AlgebraParams& p, const WeylLabel& g, const WeylLabel& h) {
  long k = 0;
  for (const auto& [site, e1] : g.entries()) {
    SiteExponent e2 = h.at(site);
    k += static_cast<long>(e2.beta) * e1.alpha - static_cast<long>(e1.beta) * e2.alpha;
  }
  return mod_n(k, p.N());
}

LocalOperator::LocalOperator(ParamsPtr params, TermMap terms) : params_(std::move(params)) {
  for (auto& [g, c] : terms) add_term(g, c);
}

LocalOperator LocalOperator::identity(ParamsPtr params, Complex c) {
  LocalOperator x(std::move(params));
  x.add_term(WeylLabel{}, c);
  return x;
}

LocalOperator LocalOperator::basis(ParamsPtr params, const WeylLabel& g, Complex c) {
  LocalOperator x(std::move(params));
  x.add_term(g, c);
  return x;
}

LocalOperator LocalOperator::site_op(ParamsPtr params, const Site& s, int alpha, int beta,
                                     Complex c) {
  const int n = params->N();
  return basis(params, WeylLabel::single(s, {alpha, beta}, n), c);
}

Complex LocalOperator::coefficient(const WeylLabel& g) const {
  auto it = terms_.find(g);
  return it == terms_.end() ? Complex{} : it->second;
}

std::vector<Site> LocalOperator::support() const {
  std::set<Site> sites;
  for (const auto& [g, c] : terms_) {
    for (const auto& e : g.entries()) sites.insert(e.first);
  }
  return {sites.begin(), sites.end()};
}

double LocalOperator::l1_norm() const {
  double s = 0;
  for (const auto& [g, c] : terms_) s += std::abs(c);
  return s;
}

double LocalOperator::max_abs_coefficient() const {
  double m = 0;
  for (const auto& [g, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void LocalOperator::add_term(const WeylLabel& g, Complex c) {
  if (c == Complex{}) return;
  auto [it, inserted] = terms_.try_emplace(g, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kCoefficientTolerance) terms_.erase(it);
}

void LocalOperator::check_compatible(const LocalOperator& o) const {
  if (!params_->same_as(*o.params_)) {
    throw ConfigError("operators built on different algebra parameters");
  }
}

LocalOperator& LocalOperator::operator+=(const LocalOperator& o) {
  check_compatible(o);
  for (const auto& [g, c] : o.terms_) add_term(g, c);
  return *this;
}

LocalOperator& LocalOperator::operator-=(const LocalOperator& o) {
  check_compatible(o);
  for (const auto& [g, c] : o.terms_) add_term(g, -c);
  return *this;
}

LocalOperator& LocalOperator::operator*=(Complex c) {
  if (c == Complex{}) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    if (std::abs(it->second) < kCoefficientTolerance) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

LocalOperator LocalOperator::operator-() const {
  LocalOperator out = *this;
  for (auto& [g, c] : out.terms_) c = -c;
  return out;
}

LocalOperator operator*(const LocalOperator& a, const LocalOperator& b) {
  a.check_compatible(b);
  const AlgebraParams& p = *a.params_;
  LocalOperator out(a.params_);
  for (const auto& [g, cg] : a.terms_) {
    for (const auto& [h, ch] : b.terms_) {
      auto prod = weyl_mul(p, g, h);
      out.add_term(prod.label, p.omega_pow(prod.phase_exponent) * cg * ch);
    }
  }
  return out;
}

bool LocalOperator::approx_equal(const LocalOperator& o, double tol) const {
  return distance(o) <= tol;
}

double LocalOperator::distance(const LocalOperator& o) const {
  check_compatible(o);
  double m = 0;
  for (const auto& [g, c] : terms_) m = std::max(m, std::abs(c - o.coefficient(g)));
  for (const auto& [g, c] : o.terms_) {
    if (!terms_.contains(g)) m = std::max(m, std::abs(c));
  }
  return m;
}

LocalOperator op_mul(const LocalOperator& x, const LocalOperator& y) { return x * y; }

LocalOperator op_adjoint(const LocalOperator& x) {
  const AlgebraParams& p = x.params();
  LocalOperator out(x.params_ptr());
  for (const auto& [g, c] : x.terms()) {
    auto adj = weyl_adjoint(p, g);
    out.add_term(adj.label, p.omega_pow(adj.phase_exponent) * std::conj(c));
  }
  return out;
}

LocalOperator commutator(const LocalOperator& x, const LocalOperator& y) {
  const AlgebraParams& p = x.params();
  LocalOperator out(x.params_ptr());
  // Labels commute up to a phase, so each pair contributes (w^k - 1) U_h U_g.
  for (const auto& [g, cg] : x.terms()) {
    for (const auto& [h, ch] : y.terms()) {
      long k = weyl_commutation_exponent(p, g, h);
      if (k == 0) continue;
      auto gh = weyl_mul(p, g, h);
      out.add_term(gh.label, p.omega_pow(gh.phase_exponent) * cg * ch * (1.0 - p.omega_pow(-k)));
    }
  }
  return out;
}

LocalOperator anticommutator(const LocalOperator& x, const LocalOperator& y) {
  return x * y + y * x;
}

LocalOperator translate(const LocalOperator& x, const Site& k) {
  LocalOperator out(x.params_ptr());
  for (const auto& [g, c] : x.terms()) out.add_term(g.translated(k), c);
  return out;
}

Complex trace(const LocalOperator& x) { return x.coefficient(WeylLabel{}); }

Complex gns_inner(const LocalOperator& u, const LocalOperator& v) {
  Complex s{};
  for (const auto& [g, c] : u.terms()) s += std::conj(c) * v.coefficient(g);
  return s;
}

double gns_norm(const LocalOperator& u) {
  double s = 0;
  for (const auto& [g, c] : u.terms()) s += std::norm(c);
  return std::sqrt(s);
}

double theta(const LocalOperator& x, int n) {
  if (n < 1) throw DomainError("theta order must be at least 1");
  double s = 0;
  for (const auto& [g, c] : x.terms()) s += std::abs(c) * std::pow(static_cast<double>(g.weight()), n);
  return s;
}

double c_const(const LocalOperator& x) {
  return static_cast<double>(x.support_size()) * (1.0 + x.l1_norm());
}

}  // namespace uhf
