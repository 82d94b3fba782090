#include <cmath>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "uhf/closure.hpp"
#include "uhf/lindblad.hpp"

namespace uhf::lindblad {

RateFit decay_rate_fit(const std::vector<double>& t, const std::vector<double>& values,
                       const RateFitOptions& opts) {
  if (t.size() != values.size()) throw FitError("time and value series differ in length");
  const auto skip = static_cast<std::size_t>(std::floor(opts.drop_fraction * static_cast<double>(t.size())));
  std::vector<double> xs, ys;
  for (std::size_t i = skip; i < t.size(); ++i) {
    if (!(values[i] > 0)) throw FitError("decay fit needs strictly positive values");
    xs.push_back(t[i]);
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 4) throw FitError("decay fit needs at least 4 points after dropping the transient");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw FitError("decay fit needs distinct times");
  const double slope = sxy / sxx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (my + slope * (xs[i] - mx));
    ss_res += r * r;
  }
  // A series constant up to rounding of the mean is fitted exactly.
  const double flat = 1e-24 * n * std::max(1.0, my * my);
  const double r2 = syy <= flat ? 1.0 : 1.0 - ss_res / syy;
  RateFit fit{-slope, r2, xs.size()};
  if (r2 < opts.min_r2) {
    throw FitError("decay fit r^2 = " + std::to_string(r2) + " below " + std::to_string(opts.min_r2));
  }
  return fit;
}

namespace {

Complex simpson(const std::vector<Complex>& f, double h, int stride) {
  const int panels = static_cast<int>(f.size() - 1) / stride;
  Complex s = f.front() + f[static_cast<std::size_t>(panels * stride)];
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f[static_cast<std::size_t>(i * stride)];
  return s * (h * stride / 3.0);
}

}  // namespace

PerturbedState perturbed_ergodic_state(const StateSpec& phi, const KrausFamily& family, double c,
                                       const LocalOperator& x, const QuadratureSpec& quad) {
  if (c < 0) throw DomainError("perturbation weight c must be nonnegative");
  if (quad.panels < 4 || quad.panels % 4 != 0) throw ConfigError("panel count must be a multiple of 4");
  PerturbedState out;
  out.value = ergodic_state(phi, x);
  if (c == 0 || x.is_zero()) return out;

  auto params = x.params_ptr();
  auto P = Lindbladian::perturbed(params, phi, family, c);
  auto Lr = Lindbladian::translation_covariant(family);
  SiteWindow window = quad.window;
  if (window.empty()) window = padded_window(x, P.radius());
  std::vector<WeylLabel> seeds;
  for (const auto& [g, cg] : x.terms()) seeds.push_back(g);
  auto sys = build_closure(
      seeds, {[&](const WeylLabel& g) { return lind_total(P, LocalOperator::basis(params, g)); }},
      [&](const WeylLabel& g) { return window.contains(g); }, 4096);
  if (sys.leakage[0].sum() > 0) {
    throw WindowError("perturbed evolution leaves the quadrature window; enlarge it");
  }
  Eigen::MatrixXcd A = Eigen::MatrixXcd(sys.matrices[0]);
  Eigen::RowVectorXcd w(sys.size());
  Eigen::VectorXd wabs(sys.size());
  for (Eigen::Index b = 0; b < sys.size(); ++b) {
    auto img = lind_total(Lr, LocalOperator::basis(params, sys.basis[static_cast<std::size_t>(b)]));
    w(b) = ergodic_state(phi, img);
    wabs(b) = std::abs(w(b));
  }
  const Eigen::VectorXcd v0 = sys.coordinates(x);

  // Integrand h(t) = Phi(L_r(P_t x)); env(t) = sum_b |w_b| |v_b(t)| >= |h(t)|.
  for (double T = 4.0; T <= 4096.0; T *= 2) {
    const int n = quad.panels;
    const double h = T / n;
    Eigen::MatrixXcd step = (h * A).exp();
    std::vector<Complex> f(static_cast<std::size_t>(n + 1));
    std::vector<double> ts, env;
    Eigen::VectorXcd v = v0;
    for (int i = 0; i <= n; ++i) {
      f[static_cast<std::size_t>(i)] = w * v;
      if (2 * i >= n) {
        ts.push_back(i * h);
        env.push_back(wabs.dot(v.cwiseAbs()));
      }
      if (i < n) v = step * v;
    }
    if (env.back() < 1e-300) {
      // Integrand vanishes identically from here on.
      out.value += c * simpson(f, h, 1);
      out.t_cut = T;
      return out;
    }
    RateFit fit;
    try {
      fit = decay_rate_fit(ts, env, {0.0, 0.0});
    } catch (const FitError&) {
      continue;
    }
    if (fit.rate <= 0) {
      if (T >= 4096.0) break;
      continue;
    }
    const double tail = env.back() / fit.rate;
    if (tail >= quad.tol / 10 && T < 4096.0) continue;
    const Complex fine = simpson(f, h, 1);
    const Complex coarse = simpson(f, h, 2);
    const Complex tail_value = f.back() / fit.rate;
    out.value += c * (fine + tail_value);
    out.error_estimate = c * (std::abs(fine - coarse) / 15.0 + tail);
    out.t_cut = T;
    out.tail_rate = fit.rate;
    return out;
  }
  throw DivergenceError("perturbed ergodic integrand does not decay");
}

}  // namespace uhf::lindblad
