#include <algorithm>
#include <cmath>
#include <set>

#include "uhf/lindblad.hpp"

namespace uhf::lindblad {

namespace {

bool meets(const std::vector<Site>& a, const std::vector<Site>& b, const Site& shift) {
  for (const auto& s : a) {
    const Site t = s + shift;
    if (std::find(b.begin(), b.end(), t) != b.end()) return true;
  }
  return false;
}

}  // namespace

KrausFamily KrausFamily::make(std::vector<LocalOperator> ops, bool unital) {
  if (ops.empty()) throw ConfigError("Kraus family needs at least one operator");
  KrausFamily fam{std::move(ops), unital};
  if (unital) {
    LocalOperator sum(fam.ops.front().params_ptr());
    for (const auto& a : fam.ops) sum += op_adjoint(a) * a;
    auto one = LocalOperator::identity(fam.ops.front().params_ptr());
    if (sum.distance(one) > 1e-12) throw DomainError("Kraus family flagged unital but sum a^* a != 1");
  }
  return fam;
}

double KrausFamily::theta_sum(int n) const {
  double s = 0;
  for (const auto& a : ops) s += theta(a, n);
  return s;
}

std::vector<Site> KrausFamily::support() const {
  std::set<Site> s;
  for (const auto& a : ops) {
    for (const auto& site : a.support()) s.insert(site);
  }
  return {s.begin(), s.end()};
}

std::vector<LocalOperator> state_kraus_ops(const StateSpec& phi, const ParamsPtr& params,
                                           const Site& site) {
  if (phi.N() != params->N()) throw ConfigError("state dimension does not match N");
  SiteWindow w({site});
  std::vector<LocalOperator> out;
  for (const auto& k : oracle::state_kraus(phi)) out.push_back(oracle::decompose(k, w, params));
  return out;
}

void Lindbladian::add_group(const std::vector<LocalOperator>& ops, double weight) {
  const int group = static_cast<int>(group_support_.size());
  std::set<Site> supp;
  for (const auto& a : ops) {
    LocalOperator m = std::sqrt(weight) * a;
    for (const auto& s : m.support()) supp.insert(s);
    members_dag_.push_back(op_adjoint(m));
    members_dd_.push_back(members_dag_.back() * m);
    members_.push_back(std::move(m));
    member_group_.push_back(group);
  }
  group_support_.emplace_back(supp.begin(), supp.end());
}

Lindbladian Lindbladian::translation_covariant(KrausFamily family) {
  Lindbladian L;
  L.kind_ = GeneratorKind::translation_covariant;
  L.params_ = family.ops.front().params_ptr();
  L.add_group(family.ops, 1.0);
  L.family_ = std::move(family);
  return L;
}

Lindbladian Lindbladian::partial_state(ParamsPtr params, StateSpec phi) {
  Lindbladian L;
  L.kind_ = GeneratorKind::partial_state;
  L.params_ = params;
  L.add_group(state_kraus_ops(phi, params), 1.0);
  L.state_ = std::move(phi);
  return L;
}

Lindbladian Lindbladian::perturbed(ParamsPtr params, StateSpec phi, KrausFamily family, double c) {
  if (c < 0) throw DomainError("perturbation weight c must be nonnegative");
  Lindbladian L;
  L.kind_ = GeneratorKind::perturbed;
  L.params_ = params;
  L.c_ = c;
  L.add_group(state_kraus_ops(phi, params), 1.0);
  if (c > 0) L.add_group(family.ops, c);
  L.state_ = std::move(phi);
  L.family_ = std::move(family);
  return L;
}

const std::vector<Site>& Lindbladian::group_support(int m) const {
  return group_support_[static_cast<std::size_t>(member_group_[static_cast<std::size_t>(m)])];
}

const LocalOperator& Lindbladian::single_r() const {
  if (members_.size() != 1) throw DomainError("operation needs a single-member Kraus family");
  return members_.front();
}

std::vector<oracle::KrausTerm> Lindbladian::kraus_terms() const {
  std::vector<oracle::KrausTerm> out(group_support_.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    out[static_cast<std::size_t>(member_group_[m])].ops.push_back(members_[m]);
  }
  return out;
}

std::vector<Site> Lindbladian::contributing_sites(const std::vector<Site>& sites) const {
  std::set<Site> out;
  for (const auto& a : members_) {
    for (const auto& t : a.support()) {
      for (const auto& s : sites) out.insert(s - t);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<NoiseIndex> Lindbladian::noise_indices(const std::vector<Site>& sites) const {
  std::set<NoiseIndex> out;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    for (const auto& t : members_[m].support()) {
      for (const auto& s : sites) out.insert({s - t, static_cast<int>(m)});
    }
  }
  return {out.begin(), out.end()};
}

std::int64_t Lindbladian::radius() const {
  std::int64_t r = 0;
  for (const auto& a : members_) {
    for (const auto& s : a.support()) r = std::max(r, s.sup_norm());
  }
  return r;
}

std::size_t Lindbladian::member_extent() const {
  std::size_t e = 0;
  for (const auto& a : members_) e = std::max(e, a.support_size());
  return e;
}

LocalOperator delta(const Lindbladian& L, const NoiseIndex& j, const LocalOperator& x) {
  return commutator(x, translate(L.member(j.member), j.k));
}

LocalOperator delta_dag(const Lindbladian& L, const NoiseIndex& j, const LocalOperator& x) {
  return commutator(translate(L.member_dag(j.member), j.k), x);
}

namespace {

// Contribution of member m translated by k; zero when the supports are disjoint.
void add_member_term(const Lindbladian& L, int m, const Site& k, const LocalOperator& x,
                     const std::vector<Site>& supp_x, LocalOperator& out) {
  if (!meets(L.member(m).support(), supp_x, k)) return;
  LocalOperator a = translate(L.member(m), k);
  LocalOperator ad = translate(L.member_dag(m), k);
  LocalOperator dd = translate(L.member_dd(m), k);
  out += ad * x * a;
  out -= 0.5 * (dd * x + x * dd);
}

}  // namespace

LocalOperator lind_site(const Lindbladian& L, const Site& k, const LocalOperator& x) {
  LocalOperator out(L.params_ptr());
  auto supp = x.support();
  for (std::size_t m = 0; m < L.member_count(); ++m) add_member_term(L, static_cast<int>(m), k, x, supp, out);
  return out;
}

LocalOperator lind_zero(const Lindbladian& L, const LocalOperator& x) {
  LocalOperator out(L.params_ptr());
  for (std::size_t m = 0; m < L.member_count(); ++m) {
    const auto& a = L.member(static_cast<int>(m));
    out += L.member_dag(static_cast<int>(m)) * x * a;
    out -= 0.5 * (L.member_dd(static_cast<int>(m)) * x + x * L.member_dd(static_cast<int>(m)));
  }
  return out;
}

LocalOperator lind_zero_commutator_form(const Lindbladian& L, const LocalOperator& x) {
  const auto& r = L.single_r();
  auto rd = op_adjoint(r);
  return 0.5 * (commutator(rd, x) * r + rd * commutator(x, r));
}

LocalOperator partial_state_site_map(const StateSpec& phi, const Site& k, const LocalOperator& x) {
  const int N = phi.N();
  LocalOperator out(x.params_ptr());
  for (const auto& [g, c] : x.terms()) {
    SiteExponent e = g.at(k);
    if (e.is_identity()) continue;
    Complex ev = phi.expectation(oracle::site_matrix(N, e.alpha, e.beta));
    std::vector<WeylLabel::Entry> rest;
    for (const auto& entry : g.entries()) {
      if (entry.first != k) rest.push_back(entry);
    }
    out.add_term(WeylLabel(std::move(rest), N), c * ev);
    out.add_term(g, -c);
  }
  return out;
}

LocalOperator lind_total(const Lindbladian& L, const LocalOperator& x, const SiteWindow* interior) {
  LocalOperator out(L.params_ptr());
  auto supp = x.support();
  if (supp.empty()) return out;
  for (const auto& k : L.contributing_sites(supp)) {
    for (std::size_t m = 0; m < L.member_count(); ++m) {
      if (interior) {
        bool inside = true;
        for (const auto& s : L.group_support(static_cast<int>(m))) inside = inside && interior->contains(s + k);
        if (!inside) continue;
      }
      add_member_term(L, static_cast<int>(m), k, x, supp, out);
    }
  }
  return out;
}

double cocycle_defect(const Lindbladian& L, const LocalOperator& x, const LocalOperator& y) {
  LocalOperator d = lind_total(L, x * y) - x * lind_total(L, y) - lind_total(L, x) * y;
  auto sx = x.support();
  auto sy = y.support();
  std::set<NoiseIndex> common;
  auto ix = L.noise_indices(sx);
  auto iy = L.noise_indices(sy);
  std::set_intersection(ix.begin(), ix.end(), iy.begin(), iy.end(),
                        std::inserter(common, common.begin()));
  for (const auto& j : common) d -= delta_dag(L, j, x) * delta(L, j, y);
  return d.max_abs_coefficient();
}

}  // namespace uhf::lindblad
