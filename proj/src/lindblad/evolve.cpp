#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unsupported/Eigen/MatrixFunctions>

#include "uhf/closure.hpp"
#include "uhf/lindblad.hpp"

namespace uhf::lindblad {

const char* to_string(EvolveMethod m) {
  switch (m) {
    case EvolveMethod::series: return "series";
    case EvolveMethod::ode: return "ode";
    case EvolveMethod::exact_closed_form: return "exact-closed-form";
    case EvolveMethod::oracle: return "oracle";
  }
  return "?";
}

SiteWindow padded_window(const LocalOperator& x, std::int64_t radius) {
  auto supp = x.support();
  if (supp.empty()) supp.push_back(Site::origin());
  const int d = x.params().d();
  std::set<Site> sites;
  std::vector<Site> offsets{Site{}};
  for (int axis = 0; axis < d; ++axis) {
    std::vector<Site> next;
    for (const auto& o : offsets) {
      for (std::int64_t v = -radius; v <= radius; ++v) {
        Site s = o;
        s.coord[static_cast<std::size_t>(axis)] = v;
        next.push_back(s);
      }
    }
    offsets.swap(next);
  }
  for (const auto& s : supp) {
    for (const auto& o : offsets) sites.insert(s + o);
  }
  return SiteWindow(std::vector<Site>(sites.begin(), sites.end()));
}

namespace {

void check_grid(const std::vector<double>& grid) {
  for (double t : grid) {
    if (t < 0) throw DomainError("evolution time must be nonnegative");
  }
}

// Rigorous l1 -> l1 bound of the window-truncated generator: each label meets at most
// |window| |supp a_m| translates of member m, and each costs at most 2 ||a_m||_1^2.
double l1_generator_bound(const Lindbladian& L, const SiteWindow& window) {
  double s = 0;
  for (std::size_t m = 0; m < L.member_count(); ++m) {
    const auto& a = L.member(static_cast<int>(m));
    s += static_cast<double>(a.support_size()) * 2.0 * a.l1_norm() * a.l1_norm();
  }
  return static_cast<double>(window.size()) * s;
}

// sum_{m > n} z^m / m!
double exp_tail(double z, int n) {
  if (z <= 0) return 0;
  double sum = 0;
  for (int m = n + 1;; ++m) {
    double term = std::exp(m * std::log(z) - std::lgamma(m + 1.0));
    sum += term;
    if (m > z && term < 1e-18 * sum) break;
    if (m > n + 100000) break;
  }
  return sum;
}

LocalOperator truncate(const LocalOperator& y, const SiteWindow& w, double& leaked) {
  LocalOperator out(y.params_ptr());
  for (const auto& [g, c] : y.terms()) {
    if (w.contains(g)) {
      out.add_term(g, c);
    } else {
      leaked += std::abs(c);
    }
  }
  return out;
}

EvolutionResult evolve_series(const Lindbladian& L, const LocalOperator& x,
                              const std::vector<double>& grid, const EvolveOptions& opts,
                              const SiteWindow& window) {
  const double tmax = grid.empty() ? 0.0 : *std::max_element(grid.begin(), grid.end());
  const double lam = l1_generator_bound(L, window);
  const double x1 = x.l1_norm();
  int n = 0;
  while (x1 * exp_tail(tmax * lam, n) > opts.tol) {
    if (++n > opts.max_terms) {
      throw DivergenceError("series tail bound does not reach tol within max_terms");
    }
  }
  const SiteWindow* interior = opts.interior ? &window : nullptr;
  std::vector<LocalOperator> coeffs{x};
  std::vector<double> leaked{0.0};
  for (int m = 1; m <= n; ++m) {
    double lk = 0;
    auto next = truncate(lind_total(L, coeffs.back(), interior), window, lk);
    next *= 1.0 / m;
    coeffs.push_back(std::move(next));
    leaked.push_back(lk / m);
  }
  EvolutionResult res;
  res.method = EvolveMethod::series;
  res.terms = n;
  for (double t : grid) {
    LocalOperator v(x.params_ptr());
    double tp = 1.0;
    double leak = 0;
    for (int m = 0; m <= n; ++m) {
      v += tp * coeffs[static_cast<std::size_t>(m)];
      leak += tp * leaked[static_cast<std::size_t>(m)];
      tp *= t;
    }
    res.grid.push_back(t);
    res.values.push_back(std::move(v));
    res.error_budget.push_back(x1 * exp_tail(t * lam, n) + leak);
  }
  return res;
}

// Dormand-Prince 5(4) on v' = A v, landing exactly on the grid points.
EvolutionResult evolve_ode(const Lindbladian& L, const LocalOperator& x,
                           const std::vector<double>& grid, const EvolveOptions& opts,
                           const SiteWindow& window) {
  const SiteWindow* interior = opts.interior ? &window : nullptr;
  std::vector<WeylLabel> seeds;
  for (const auto& [g, c] : x.terms()) seeds.push_back(g);
  if (seeds.empty()) seeds.push_back(WeylLabel{});
  auto params = x.params_ptr();
  auto sys = build_closure(
      seeds,
      {[&](const WeylLabel& g) { return lind_total(L, LocalOperator::basis(params, g), interior); }},
      [&](const WeylLabel& g) { return window.contains(g); }, opts.max_basis);
  const kernels::SparseMatrix& A = sys.matrices[0];
  const Eigen::VectorXd& leak = sys.leakage[0];

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });

  EvolutionResult res;
  res.method = EvolveMethod::ode;
  res.grid = grid;
  res.values.assign(grid.size(), LocalOperator(params));
  res.error_budget.assign(grid.size(), 0.0);

  Eigen::VectorXcd v = sys.coordinates(x);
  double t = 0, err_acc = 0, leak_acc = 0;
  double h = 1e-3;
  Eigen::VectorXcd k1 = A * v, k2, k3, k4, k5, k6, k7, tmp, vn;
  for (std::size_t idx : order) {
    const double target = grid[idx];
    while (t < target) {
      h = std::min(h, target - t);
      tmp = v + h * a21 * k1;
      k2 = A * tmp;
      tmp = v + h * (a31 * k1 + a32 * k2);
      k3 = A * tmp;
      tmp = v + h * (a41 * k1 + a42 * k2 + a43 * k3);
      k4 = A * tmp;
      tmp = v + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      k5 = A * tmp;
      tmp = v + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      k6 = A * tmp;
      vn = v + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = A * vn;
      Eigen::VectorXcd errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double scale = opts.tol * (1.0 + v.cwiseAbs().maxCoeff());
      double err = errv.cwiseAbs().maxCoeff() / scale;
      if (err <= 1.0 || h < 1e-12) {
        // Trapezoid estimate of the leaked mass over the step.
        double l0 = leak.dot(v.cwiseAbs()), l1 = leak.dot(vn.cwiseAbs());
        leak_acc += 0.5 * h * (l0 + l1);
        err_acc += errv.cwiseAbs().maxCoeff();
        t += h;
        v = vn;
        k1 = k7;
      }
      double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
      h = std::max(h, 1e-12);
    }
    res.values[idx] = sys.to_operator(v, params);
    res.error_budget[idx] = err_acc + leak_acc;
  }
  return res;
}

EvolutionResult evolve_oracle(const Lindbladian& L, const LocalOperator& x,
                              const std::vector<double>& grid, const EvolveOptions& opts,
                              const SiteWindow& window) {
  auto params = x.params_ptr();
  auto closure = opts.interior ? oracle::Closure::interior : oracle::Closure::clipped;
  auto S = oracle::superoperator(L.kraus_terms(), params, window, closure);
  auto basis = oracle::window_basis(*params, window);
  auto v0 = oracle::vectorize(x, basis);
  EvolutionResult res;
  res.method = EvolveMethod::oracle;
  for (double t : grid) {
    res.grid.push_back(t);
    res.values.push_back(oracle::devectorize(oracle::expm_evolve(S, t, v0), basis, params));
    res.error_budget.push_back(1e-13 * (1.0 + x.l1_norm()));
  }
  return res;
}

}  // namespace

EvolutionResult evolve(const Lindbladian& L, const LocalOperator& x, const std::vector<double>& grid,
                       const EvolveOptions& opts) {
  check_grid(grid);
  if (opts.method == EvolveMethod::exact_closed_form) {
    if (L.kind() != GeneratorKind::partial_state) {
      throw DomainError("closed form is only available for the partial-state generator");
    }
    EvolutionResult res;
    res.method = EvolveMethod::exact_closed_form;
    for (double t : grid) {
      res.grid.push_back(t);
      res.values.push_back(partial_semigroup_exact(*L.state(), x, t));
      res.error_budget.push_back(0.0);
    }
    return res;
  }
  SiteWindow window = opts.window.empty() ? padded_window(x, L.radius()) : opts.window;
  for (const auto& [g, c] : x.terms()) {
    if (!window.contains(g)) throw WindowError("observable support lies outside the evolution window");
  }
  switch (opts.method) {
    case EvolveMethod::series: return evolve_series(L, x, grid, opts, window);
    case EvolveMethod::ode: return evolve_ode(L, x, grid, opts, window);
    case EvolveMethod::oracle: return evolve_oracle(L, x, grid, opts, window);
    default: break;
  }
  throw DomainError("unknown evolution method");
}

LocalOperator partial_semigroup_exact(const StateSpec& phi, const LocalOperator& x, double t) {
  if (t < 0) throw DomainError("evolution time must be nonnegative");
  const int N = phi.N();
  auto params = x.params_ptr();
  const double decay = std::exp(-t);
  std::map<std::pair<int, int>, Complex> expect;
  LocalOperator out(params);
  for (const auto& [g, c] : x.terms()) {
    LocalOperator term = LocalOperator::identity(params, c);
    for (const auto& [site, e] : g.entries()) {
      auto key = std::make_pair(e.alpha, e.beta);
      if (!expect.contains(key)) expect[key] = phi.expectation(oracle::site_matrix(N, e.alpha, e.beta));
      const Complex ev = expect[key];
      LocalOperator factor = LocalOperator::identity(params, ev * (1.0 - decay));
      factor.add_term(WeylLabel::single(site, e, N), decay);
      term = term * factor;
    }
    out += term;
  }
  return out;
}

Complex ergodic_state(const StateSpec& phi, const LocalOperator& x) {
  const int N = phi.N();
  Complex total{};
  for (const auto& [g, c] : x.terms()) {
    Complex p = c;
    for (const auto& [site, e] : g.entries()) p *= phi.expectation(oracle::site_matrix(N, e.alpha, e.beta));
    total += p;
  }
  return total;
}

}  // namespace uhf::lindblad
