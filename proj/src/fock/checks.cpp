#include <algorithm>
#include <cmath>
#include <set>

#include "uhf/fock.hpp"

namespace uhf::fock {

DefectReport homomorphism_defect(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                 const LocalOperator& y, const LocalOperator& u,
                                 const TestFunction& f, const LocalOperator& v,
                                 const TestFunction& g, const std::vector<double>& grid,
                                 const FlowOptions& opts) {
  auto F = flow_element(sys, x * y, u, f, v, g, grid, opts);
  auto G = pair_element(sys, {{x, y}}, u, f, v, g, grid, opts);
  DefectReport out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(F.values[i] - G.values[i][0]);
    const double e = F.error_estimate[i] + G.error_estimate[i][0];
    out.defect.push_back(d);
    out.estimate.push_back(e);
    out.max_defect = std::max(out.max_defect, d);
    out.max_estimate = std::max(out.max_estimate, e);
  }
  return out;
}

ContractionReport contraction_check(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                    const std::vector<FamilyMember>& family, double t,
                                    const FlowOptions& opts) {
  if (family.empty() || family.size() > 8) throw DomainError("family size must be 1..8");
  const LocalOperator xx = op_adjoint(x) * x;
  Complex lhs = 0;
  Complex xi = 0;
  ContractionReport out;
  for (const auto& a : family) {
    for (const auto& b : family) {
      const Complex w = std::conj(a.c) * b.c;
      auto F = flow_element(sys, xx, a.u, a.f, b.u, b.f, {t}, opts);
      lhs += w * F.values.back();
      out.error += std::abs(w) * F.error_estimate.back();
      xi += w * gns_inner(a.u, b.u) * exp_inner(a.f, b.f);
    }
  }
  const double nx = oracle::operator_norm(x);
  out.lhs = lhs.real();
  out.imag_residual = std::abs(lhs.imag());
  out.rhs = nx * nx * xi.real();
  return out;
}

CovarianceReport covariance_check(const Lindbladian& L, const SiteWindow& window,
                                  const LocalOperator& x, const LocalOperator& u,
                                  const TestFunction& f, const LocalOperator& v,
                                  const TestFunction& g, const Site& j,
                                  const std::vector<double>& grid, const FlowOptions& opts) {
  if (L.kind() != lindblad::GeneratorKind::translation_covariant &&
      L.kind() != lindblad::GeneratorKind::partial_state) {
    throw DomainError("covariance check needs a translation-covariant generator");
  }
  const Site mj = Site::origin() - j;
  auto sys_a = build_generator_system(L, window, {x}, 4096, opts.exec);
  auto sys_b = build_generator_system(L, window.translated(mj), {translate(x, mj)}, 4096, opts.exec);
  auto A = flow_element(sys_a, x, u, f, v, g, grid, opts);
  auto B = flow_element(sys_b, translate(x, mj), translate(u, mj), f.shifted(j), translate(v, mj),
                        g.shifted(j), grid, opts);
  CovarianceReport out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.deviation = std::max(out.deviation, std::abs(A.values[i] - B.values[i]));
    out.estimate = std::max(out.estimate, A.error_estimate[i] + B.error_estimate[i]);
  }
  return out;
}

namespace {

FlowGeneratorSystem site_system(const StateSpec& phi, const ParamsPtr& params, const Site& k,
                                kernels::Exec exec) {
  auto L = Lindbladian::partial_state(params, phi);
  return build_generator_system(L, SiteWindow({k}), {}, 4096, exec);
}

}  // namespace

MatrixElementTrajectory eta_site_flow(const StateSpec& phi, const Site& k, const LocalOperator& x,
                                      const LocalOperator& u, const TestFunction& f,
                                      const LocalOperator& v, const TestFunction& g,
                                      const std::vector<double>& grid, const FlowOptions& opts) {
  for (const auto& s : x.support()) {
    if (s != k) throw DomainError("eta site flow needs supp(x) inside {k}");
  }
  auto sys = site_system(phi, x.params_ptr(), k, opts.exec);
  return flow_element(sys, x, u, f, v, g, grid, opts);
}

MatrixElementTrajectory eta_product_flow(const StateSpec& phi, const SiteWindow& window,
                                         const LocalOperator& x, const LocalOperator& u,
                                         const TestFunction& f, const LocalOperator& v,
                                         const TestFunction& g, const std::vector<double>& grid,
                                         const FlowOptions& opts, std::size_t max_products) {
  for (const auto& s : x.support()) {
    if (!window.contains(s)) throw DomainError("eta product flow needs supp(x) inside the window");
  }
  if (x.term_count() * u.term_count() * v.term_count() > max_products) {
    throw SizeError("eta product expansion exceeds the cost guard");
  }
  const auto params = x.params_ptr();
  const auto& sites = window.sites();
  const Complex rest = exp_inner(f.without(sites), g.without(sites));

  struct SiteData {
    FlowGeneratorSystem sys;
    TestFunction f, g;
    // Trajectories keyed by the (u, v) site labels.
    std::map<std::pair<WeylLabel, WeylLabel>, MatrixElementTrajectory> cache;
  };
  std::vector<SiteData> data;
  for (const auto& k : sites) {
    data.push_back({site_system(phi, params, k, opts.exec), f.restricted({k}), g.restricted({k}), {}});
  }
  auto site_traj = [&](std::size_t s, const WeylLabel& h, const WeylLabel& l) -> const MatrixElementTrajectory& {
    auto& d = data[s];
    auto key = std::make_pair(h, l);
    auto it = d.cache.find(key);
    if (it != d.cache.end()) return it->second;
    auto traj = flow_element(d.sys, LocalOperator::identity(params), LocalOperator::basis(params, h), d.f,
                             LocalOperator::basis(params, l), d.g, grid, opts);
    return d.cache.emplace(key, std::move(traj)).first->second;
  };

  MatrixElementTrajectory out;
  out.grid = grid;
  out.values.assign(grid.size(), 0.0);
  out.error_estimate.assign(grid.size(), 0.0);
  for (const auto& [gx, cx] : x.terms()) {
    for (const auto& [hu, cu] : u.terms()) {
      for (const auto& [lv, cv] : v.terms()) {
        // Outside the window the factor is the GNS overlap of the site labels.
        std::vector<Site> outside;
        for (const auto& s : hu.support()) {
          if (!window.contains(s)) outside.push_back(s);
        }
        for (const auto& s : lv.support()) {
          if (!window.contains(s)) outside.push_back(s);
        }
        if (hu.restricted_to(outside) != lv.restricted_to(outside)) continue;
        const Complex w = std::conj(cu) * cv * cx * rest;
        std::vector<const MatrixElementTrajectory*> trajs;
        std::vector<Eigen::Index> cols;
        for (std::size_t s = 0; s < sites.size(); ++s) {
          const std::vector<Site> one{sites[s]};
          const auto& tr = site_traj(s, hu.restricted_to(one), lv.restricted_to(one));
          trajs.push_back(&tr);
          cols.push_back(data[s].sys.closure.find(gx.restricted_to(one)));
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
          Complex prod = 1.0;
          // Error of a product: err_k <= err_{k-1} (|a_k| + e_k) + e_k |prod_{k-1}|.
          double err = 0;
          for (std::size_t s = 0; s < sites.size(); ++s) {
            const Complex val = trajs[s]->rows(static_cast<Eigen::Index>(i), cols[s]);
            const double e = trajs[s]->row_error[i];
            err = err * (std::abs(val) + e) + e * std::abs(prod);
            prod *= val;
          }
          out.values[i] += w * prod;
          out.error_estimate[i] += std::abs(w) * err;
        }
      }
    }
  }
  double running = 0;
  for (auto& e : out.error_estimate) e = running = std::max(running, e);
  out.row_error = out.error_estimate;
  return out;
}

ErgodicityScan eta_ergodicity_scan(const StateSpec& phi, const LocalOperator& x,
                                   const LocalOperator& u, const TestFunction& f,
                                   const LocalOperator& v, const TestFunction& g,
                                   const std::vector<double>& grid, const FlowOptions& opts) {
  auto supp = x.support();
  if (supp.empty()) supp.push_back(Site::origin());
  auto F = eta_product_flow(phi, SiteWindow(supp), x, u, f, v, g, grid, opts);
  ErgodicityScan out;
  out.grid = grid;
  out.target = lindblad::ergodic_state(phi, x) * gns_inner(u, v) * exp_inner(f, g);
  for (const auto& val : F.values) out.values.push_back(std::abs(val - out.target));
  try {
    out.fit = lindblad::decay_rate_fit(grid, out.values);
    out.fit_ok = true;
  } catch (const FitError& e) {
    out.fit_message = e.what();
  }
  return out;
}

std::vector<double> hp_divergence_witness(const LocalOperator& r, const LocalOperator& u, int K) {
  if (K < 1) throw DomainError("K must be at least 1");
  const int d = r.params().d();
  std::vector<double> shell(static_cast<std::size_t>(K) + 1, 0.0);
  Site j = Site::origin();
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d), -K);
  while (true) {
    for (int a = 0; a < d; ++a) j.coord[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(a)];
    const double n = gns_norm(translate(r, j) * u);
    shell[static_cast<std::size_t>(j.sup_norm())] += n * n;
    int a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] > K) idx[static_cast<std::size_t>(a++)] = -K;
    if (a == d) break;
  }
  std::vector<double> out;
  double s = shell[0];
  for (int k = 1; k <= K; ++k) out.push_back(s += shell[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace uhf::fock
