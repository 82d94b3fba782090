#include <cmath>

#include "uhf/lindblad.hpp"

namespace uhf::lindblad {

namespace {

constexpr std::size_t kMaxEnumeration = 2'000'000;

LocalOperator apply_eps(const Lindbladian& L, int eps, const Site& k, const LocalOperator& z) {
  switch (eps) {
    case -1: return delta_dag(L, {k, 0}, z);
    case 0: return lind_site(L, k, z);
    case 1: return delta(L, {k, 0}, z);
    default: throw DomainError("multi-index entries must lie in {-1, 0, 1}");
  }
}

void check_eps(const std::vector<int>& eps) {
  for (int e : eps) {
    if (e < -1 || e > 1) throw DomainError("multi-index entries must lie in {-1, 0, 1}");
  }
}

// Calls leaf(z) for every nonzero delta(k, eps)(z) with k running over the translates
// that can act nontrivially on the current operator.
template <class Leaf>
void enumerate(const Lindbladian& L, const LocalOperator& z, const std::vector<int>& eps,
               std::size_t level, std::size_t& count, const Leaf& leaf) {
  if (z.is_zero()) return;
  if (level == eps.size()) {
    if (++count > kMaxEnumeration) throw SizeError("lemma enumeration exceeds the size guard");
    leaf(z);
    return;
  }
  for (const auto& k : L.contributing_sites(z.support())) {
    enumerate(L, apply_eps(L, eps[level], k, z), eps, level + 1, count, leaf);
  }
}

double sum_norms(const Lindbladian& L, const LocalOperator& x, const std::vector<int>& eps,
                 std::size_t& count) {
  double s = 0;
  enumerate(L, x, eps, 0, count, [&](const LocalOperator& z) { s += oracle::operator_norm(z); });
  return s;
}

std::vector<LocalOperator> all_images(const Lindbladian& L, const LocalOperator& x,
                                      const std::vector<int>& eps, std::size_t& count) {
  std::vector<LocalOperator> out;
  enumerate(L, x, eps, 0, count, [&](const LocalOperator& z) { out.push_back(z); });
  return out;
}

}  // namespace

LocalOperator multi_derivation(const Lindbladian& L, const LocalOperator& x, const MultiIndex& m) {
  if (m.kbar.size() != m.epsbar.size() || m.kbar.empty()) {
    throw DomainError("multi-index needs equal nonzero lengths");
  }
  check_eps(m.epsbar);
  LocalOperator z = x;
  for (std::size_t i = 0; i < m.kbar.size(); ++i) {
    if (m.epsbar[i] != 0) L.single_r();
    z = apply_eps(L, m.epsbar[i], m.kbar[i], z);
  }
  return z;
}

double leibniz_expansion_check(const Lindbladian& L, const LocalOperator& x,
                               const std::vector<Site>& kbar) {
  const auto& r = L.single_r();
  const std::size_t n = kbar.size();
  if (n == 0 || n > 8) throw DomainError("Leibniz check supports 1 <= n <= 8");
  LocalOperator lhs = x;
  for (const auto& k : kbar) lhs = lind_site(L, k, lhs);

  auto params = x.params_ptr();
  LocalOperator rhs(params);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    MultiIndex mi{kbar, std::vector<int>(n)};
    LocalOperator right = LocalOperator::identity(params);
    LocalOperator left = LocalOperator::identity(params);
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_p = (mask >> i) & 1u;
      mi.epsbar[i] = in_p ? -1 : 1;
      if (in_p) {
        right = right * translate(r, kbar[i]);
      } else {
        left = left * translate(r, kbar[i]);
      }
    }
    rhs += op_adjoint(left) * multi_derivation(L, x, mi) * right;
  }
  rhs *= std::pow(0.5, static_cast<double>(n));
  return lhs.distance(rhs);
}

LemmaBound lemma_pure(const Lindbladian& L, const LocalOperator& x, int n) {
  const auto& r = L.single_r();
  if (n < 1) throw DomainError("lemma order n must be at least 1");
  LemmaBound out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> eps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eps[static_cast<std::size_t>(i)] = ((mask >> i) & 1u) ? 1 : -1;
    std::size_t count = 0;
    out.lhs = std::max(out.lhs, sum_norms(L, x, eps, count));
    out.terms += count;
  }
  out.rhs = std::pow(2.0 * theta(r, 1) * c_const(x), n);
  return out;
}

LemmaBound lemma_mixed(const Lindbladian& L, const LocalOperator& x, const std::vector<int>& eps) {
  const auto& r = L.single_r();
  if (eps.empty()) throw DomainError("lemma order n must be at least 1");
  check_eps(eps);
  int p = 0;
  for (int e : eps) p += (e == 0);
  LemmaBound out;
  out.lhs = sum_norms(L, x, eps, out.terms);
  out.rhs = std::pow(oracle::operator_norm(r), p) *
            std::pow(2.0 * theta(r, 1) * c_const(x), static_cast<double>(eps.size()));
  return out;
}

LemmaBound lemma_product(const Lindbladian& L, const LocalOperator& x, const LocalOperator& y,
                         const std::vector<int>& eps, const std::vector<int>& eps_x,
                         const std::vector<int>& eps_y) {
  const auto& r = L.single_r();
  if (eps.empty() || eps_x.empty() || eps_y.empty()) throw DomainError("lemma orders must be >= 1");
  check_eps(eps);
  check_eps(eps_x);
  check_eps(eps_y);
  LemmaBound out;
  auto xs = all_images(L, x, eps_x, out.terms);
  auto ys = all_images(L, y, eps_y, out.terms);
  for (const auto& a : xs) {
    for (const auto& b : ys) out.lhs += sum_norms(L, a * b, eps, out.terms);
  }
  const double n = static_cast<double>(eps.size());
  const double m1 = static_cast<double>(eps_x.size());
  const double m2 = static_cast<double>(eps_y.size());
  const double cxy = std::max(c_const(x), c_const(y));
  out.rhs = std::pow(2.0, n) * std::pow(1.0 + oracle::operator_norm(r), 2 * n + m1 + m2) *
            std::pow(2.0 * theta(r, 1) * cxy, n + m1 + m2);
  return out;
}

}  // namespace uhf::lindblad
