#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>

#include "uhf/harness.hpp"
#include "uhf/random.hpp"

namespace uhf::harness {

namespace {

namespace fs = std::filesystem;
using lindblad::GeneratorKind;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Collects verdicts and outputs; writes report.json even when a check throws.
class Runner {
 public:
  Runner(std::string command, const fs::path& out, std::string digest, std::uint64_t seed)
      : out_(out), start_(std::chrono::steady_clock::now()) {
    report_.command = std::move(command);
    report_.inputs_digest = std::move(digest);
    report_.seed = seed;
    fs::create_directories(out_ / "results");
  }

  fs::path result(const std::string& name) {
    report_.outputs.push_back("results/" + name);
    return out_ / "results" / name;
  }

  void verdict(std::string name, double measured, double threshold, std::string detail = {}) {
    const bool ok = std::isfinite(measured) && measured <= threshold;
    report_.add({std::move(name), ok, measured, threshold, std::move(detail)});
  }
  void add(Verdict v) { report_.add(std::move(v)); }

  /// Runs fn; engine errors are rethrown with the check name after the report is written.
  void check(const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      fail(name, e.what());
      throw ConfigError(name + ": " + e.what());
    } catch (const std::exception& e) {
      fail(name, e.what());
      throw Error(name + ": " + e.what());
    }
  }

  RunReport finish() {
    report_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_report(out_ / "report.json", report_);
    return report_;
  }

 private:
  void fail(const std::string& name, const std::string& what) {
    report_.add({name, false, 0, 0, what});
    finish();
  }

  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  RunReport report_;
};

void write_operator_trajectory(const fs::path& path, const std::vector<double>& grid,
                               const std::vector<LocalOperator>& values, const std::vector<double>& err) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "t,label,re,im,err\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& [g, c] : values[i].terms()) {
      out << num(grid[i]) << ",\"" << label_to_text(g, values[i].params().d()) << "\"," << num(c.real()) << ','
          << num(c.imag()) << ',' << num(i < err.size() ? err[i] : 0.0) << '\n';
    }
  }
}

lindblad::EvolveMethod evolve_method(const std::string& s) {
  if (s == "ode") return lindblad::EvolveMethod::ode;
  if (s == "series") return lindblad::EvolveMethod::series;
  if (s == "oracle") return lindblad::EvolveMethod::oracle;
  if (s == "exact") return lindblad::EvolveMethod::exact_closed_form;
  throw ConfigError("method must be ode, series, oracle or exact");
}

fock::FlowOptions flow_options(const ExperimentConfig& cfg) {
  fock::FlowOptions o;
  const auto m = cfg.get("method", "expm");
  if (m == "expm") {
    o.method = fock::FlowMethod::expm;
  } else if (m == "rk4") {
    o.method = fock::FlowMethod::rk4;
  } else if (m == "picard") {
    o.method = fock::FlowMethod::picard;
  } else {
    throw ConfigError("flow method must be expm, rk4 or picard");
  }
  o.substeps = cfg.integer("substeps", 16);
  o.picard_depth = cfg.integer("picard_depth", 0);
  o.picard_tol = cfg.number("picard_tol", 1e-9);
  o.leakage_budget = cfg.number("leakage_budget", 1e-6);
  return o;
}

std::vector<std::string> observables(const ExperimentConfig& cfg) {
  auto names = cfg.list("observables");
  if (names.empty()) throw ConfigError("[run] needs 'observables'");
  for (const auto& n : names) cfg.op(n);
  return names;
}

std::vector<Site> support_union(const std::vector<LocalOperator>& ops) {
  std::vector<Site> out;
  for (const auto& x : ops) {
    for (const auto& s : x.support()) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }
  if (out.empty()) out.push_back(Site::origin());
  std::sort(out.begin(), out.end());
  return out;
}

/// Union of supports padded by the cube of the given radius.
oracle::SiteWindow padded(const ParamsPtr& p, const std::vector<LocalOperator>& ops, std::int64_t radius) {
  LocalOperator probe(p);
  for (const auto& s : support_union(ops)) probe += LocalOperator::site_op(p, s, 1, 0);
  return lindblad::padded_window(probe, radius);
}

}  // namespace

RunReport cmd_evolve(const ExperimentConfig& cfg, const fs::path& out) {
  Runner run("evolve", out, cfg.digest, cfg.seed);
  auto L = cfg.build_generator();
  const auto grid = cfg.times("t_grid", "0:0.25:1");
  const double tol = cfg.number("tol", 1e-9);
  lindblad::EvolveOptions opts;
  opts.method = evolve_method(cfg.get("method", "ode"));
  const auto radius = static_cast<std::int64_t>(cfg.integer("radius", static_cast<int>(L.radius())));
  for (const auto& name : observables(cfg)) {
    const auto& x = cfg.op(name);
    opts.window = lindblad::padded_window(x, radius);
    lindblad::EvolutionResult res;
    run.check("evolve " + name, [&] {
      res = lindblad::evolve(L, x, grid, opts);
      write_operator_trajectory(run.result("evolve_" + name + ".csv"), grid, res.values, res.error_budget);
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == 0) run.verdict(name + ": P_0 x = x", res.values[i].distance(x), 1e-14);
    }
    double unit = 0;
    run.check("unitality " + name, [&] {
      auto one = lindblad::evolve(L, LocalOperator::identity(cfg.params), grid, opts);
      for (const auto& v : one.values) unit = std::max(unit, v.distance(LocalOperator::identity(cfg.params)));
    });
    run.verdict(name + ": P_t(1) = 1", unit, 1e-10);
    const long dim = opts.window.dim(cfg.params->N());
    if (dim * dim <= oracle::kMaxSuperoperatorDim && opts.method != lindblad::EvolveMethod::oracle) {
      run.check("oracle " + name, [&] {
        auto o = opts;
        o.method = lindblad::EvolveMethod::oracle;
        auto ref = lindblad::evolve(L, x, grid, o);
        double err = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, res.values[i].distance(ref.values[i]));
        run.verdict(name + ": vs dense expm", err, tol);
      });
    }
    if (L.kind() == GeneratorKind::partial_state) {
      run.check("closed form " + name, [&] {
        double err = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          err = std::max(err, res.values[i].distance(lindblad::partial_semigroup_exact(*L.state(), x, grid[i])));
        }
        run.verdict(name + ": vs closed form", err, tol);
      });
    }
  }
  return run.finish();
}

RunReport cmd_ergodicity(const ExperimentConfig& cfg, const fs::path& out) {
  Runner run("ergodicity", out, cfg.digest, cfg.seed);
  auto L = cfg.build_generator();
  if (!L.state()) throw ConfigError("ergodicity needs a partial_state or perturbed generator");
  const auto& phi = *L.state();
  const auto grid = cfg.times("t_grid", "0:0.25:6");
  const double rate_tol = cfg.number("rate_tol", 1e-3);
  const double quad_tol = cfg.number("quad_tol", 1e-6);
  std::ofstream states(run.result("ergodic_states.csv"));
  states << "observable,phi_re,phi_im,phic_re,phic_im,phic_err,rate,r2\n";
  for (const auto& name : observables(cfg)) {
    const auto& x = cfg.op(name);
    run.check("ergodicity " + name, [&] {
      const Complex p0 = lindblad::ergodic_state(phi, x);
      lindblad::PerturbedState pc{p0, 0, 0, 0};
      if (L.kind() == GeneratorKind::perturbed) {
        lindblad::QuadratureSpec q;
        q.tol = quad_tol;
        pc = lindblad::perturbed_ergodic_state(phi, L.family(), L.c(), x, q);
      }
      auto ev = lindblad::evolve(L, x, grid);
      std::vector<double> vals;
      for (const auto& v : ev.values) vals.push_back(oracle::operator_norm(v - LocalOperator::identity(cfg.params, pc.value)));
      std::ofstream tab(run.result("decay_" + name + ".csv"));
      tab << "t,norm\n";
      for (std::size_t i = 0; i < grid.size(); ++i) tab << num(grid[i]) << ',' << num(vals[i]) << '\n';
      lindblad::RateFit fit;
      if (*std::max_element(vals.begin(), vals.end()) > 1e-13) {
        fit = lindblad::decay_rate_fit(grid, vals, {0.1, cfg.number("min_r2", 0.999)});
        if (L.kind() == GeneratorKind::partial_state) {
          run.verdict(name + ": |rate - 1|", std::abs(fit.rate - 1.0), rate_tol);
        } else {
          run.add({name + ": rate positive", fit.rate > 0, fit.rate, 0.0, "rate must exceed the threshold"});
        }
      }
      states << name << ',' << num(p0.real()) << ',' << num(p0.imag()) << ',' << num(pc.value.real()) << ','
             << num(pc.value.imag()) << ',' << num(pc.error_estimate) << ',' << num(fit.rate) << ','
             << num(fit.r2) << '\n';
      if (L.kind() == GeneratorKind::perturbed) {
        run.verdict(name + ": Phi^(c) quadrature error", pc.error_estimate, quad_tol);
      }
    });
    if (cfg.run.contains("u") && L.kind() == GeneratorKind::partial_state) {
      run.check("flow ergodicity " + name, [&] {
        const auto sgrid = cfg.times("scan_grid", "0:0.1:15");
        auto scan = fock::eta_ergodicity_scan(phi, x, cfg.op(cfg.get("u", "")), cfg.test_function(cfg.get("f", "")),
                                              cfg.op(cfg.get("v", cfg.get("u", ""))),
                                              cfg.test_function(cfg.get("g", "")), sgrid, flow_options(cfg));
        std::ofstream tab(run.result("eta_scan_" + name + ".csv"));
        tab << "t,deviation\n";
        for (std::size_t i = 0; i < sgrid.size(); ++i) tab << num(sgrid[i]) << ',' << num(scan.values[i]) << '\n';
        run.add({name + ": flow rate fit", scan.fit_ok, scan.fit_ok ? 1.0 : 0.0, 1.0, scan.fit_message});
        if (scan.fit_ok) run.verdict(name + ": flow |rate - 1|", std::abs(scan.fit.rate - 1.0), 1e-2);
        run.verdict(name + ": final deviation", scan.values.back(), cfg.number("scan_tol", 1e-6));
      });
    }
  }
  return run.finish();
}

RunReport cmd_flow(const ExperimentConfig& cfg, const fs::path& out) {
  Runner run("flow", out, cfg.digest, cfg.seed);
  auto L = cfg.build_generator();
  const auto grid = cfg.times("t_grid", "0:0.1:1");
  const auto opts = flow_options(cfg);
  const double tol = cfg.number("tol", 1e-8);
  const auto& u = cfg.op(cfg.get("u", "u"));
  const auto& v = cfg.op(cfg.get("v", cfg.get("u", "u")));
  const auto f = cfg.test_function(cfg.get("f", ""));
  const auto g = cfg.test_function(cfg.get("g", ""));
  const auto names = observables(cfg);
  std::vector<LocalOperator> xs;
  for (const auto& n : names) xs.push_back(cfg.op(n));
  const auto radius = static_cast<std::int64_t>(cfg.integer("radius", static_cast<int>(L.radius())));
  const auto window = padded(cfg.params, xs, radius);
  std::vector<LocalOperator> seeds = xs;
  for (const auto& a : xs) {
    for (const auto& b : xs) seeds.push_back(a * b);
    seeds.push_back(op_adjoint(a) * a);
  }
  fock::FlowGeneratorSystem sys;
  run.check("generator system", [&] {
    sys = fock::build_generator_system(L, window, seeds, static_cast<std::size_t>(cfg.integer("max_basis", 4096)),
                                       opts.exec);
  });
  run.add({"window leakage", true, sys.total_leakage(), 0.0, "informational; enters the error estimates"});

  run.check("unitality", [&] {
    auto F = fock::flow_element(sys, LocalOperator::identity(cfg.params), u, f, v, g, grid, opts);
    const Complex ref = gns_inner(u, v) * fock::exp_inner(f, g);
    double dev = 0;
    for (const auto& val : F.values) dev = std::max(dev, std::abs(val - ref));
    run.verdict("F_t(1) constant", dev, 1e-9);
  });

  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    const auto& name = names[i];
    run.check("flow " + name, [&] {
      auto F = fock::flow_element(sys, x, u, f, v, g, grid, opts);
      write_trajectory_csv(run.result("flow_" + name + ".csv"), grid, name, F.values, F.error_estimate);
      run.add({name + ": estimate within budget", !F.flagged, F.error_estimate.back(), opts.leakage_budget,
               F.flagged ? "trajectory flagged" : ""});
      if (f.is_zero() && g.is_zero()) {
        lindblad::EvolveOptions eo;
        eo.window = window;
        auto ev = lindblad::evolve(L, x, grid, eo);
        double dev = 0, est = 0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          dev = std::max(dev, std::abs(F.values[k] - gns_inner(u, ev.values[k] * v)));
          est = std::max(est, F.error_estimate[k] + ev.error_budget[k] * gns_norm(u) * gns_norm(v));
        }
        run.verdict(name + ": vacuum reduction", dev, tol + est);
      }
    });
    run.check("contraction " + name, [&] {
      std::vector<fock::FamilyMember> fam{{1.0, u, f}, {Complex(0, 1), v, g}};
      auto c = fock::contraction_check(sys, x, fam, grid.back(), opts);
      const double eps = c.error + 1e-9 * std::max(1.0, c.rhs);
      run.verdict(name + ": contraction lhs - rhs", c.lhs - c.rhs, eps);
      run.verdict(name + ": contraction -lhs", -c.lhs, eps);
    });
    if (cfg.run.contains("shift") && L.kind() != GeneratorKind::perturbed) {
      run.check("covariance " + name, [&] {
        const Site j = parse_site(cfg.get("shift", ""), cfg.params->d());
        auto c = fock::covariance_check(L, window, x, u, f, v, g, j, grid, opts);
        run.verdict(name + ": covariance deviation", c.deviation, 2.0 * c.estimate + 1e-12);
      });
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const auto label = names[i] + "*" + names[k];
      run.check("homomorphism " + label, [&] {
        auto D = fock::homomorphism_defect(sys, xs[i], xs[k], u, f, v, g, grid, opts);
        std::vector<Complex> dv(D.defect.begin(), D.defect.end());
        write_trajectory_csv(run.result("defect_" + names[i] + "_" + names[k] + ".csv"), grid, label, dv,
                             D.estimate);
        double over = 0;
        for (std::size_t t = 0; t < grid.size(); ++t) over = std::max(over, D.defect[t] - D.estimate[t]);
        run.verdict(label + ": defect - estimate", over, 0.0);
      });
    }
  }
  return run.finish();
}

RunReport cmd_lemma(const ExperimentConfig& cfg, const fs::path& out) {
  Runner run("lemma", out, cfg.digest, cfg.seed);
  auto L = cfg.build_generator();
  const int n_max = cfg.integer("n_max", 3);
  const int samples = cfg.integer("samples", 10);
  if (n_max < 1 || n_max > 4) throw ConfigError("n_max must lie in 1..4");
  Rng rng(cfg.seed);
  const auto names = observables(cfg);
  std::ofstream tab(run.result("lemma.csv"));
  tab << "check,observable,n,lhs,rhs\n";
  for (const auto& name : names) {
    const auto& x = cfg.op(name);
    run.check("identity " + name, [&] {
      const auto ks = L.contributing_sites(x.support());
      double worst = 0;
      for (int n = 1; n <= n_max; ++n) {
        for (int s = 0; s < samples; ++s) {
          std::vector<Site> kbar;
          for (int m = 0; m < n; ++m) {
            kbar.push_back(ks[std::uniform_int_distribution<std::size_t>(0, ks.size() - 1)(rng)]);
          }
          const double d = lindblad::leibniz_expansion_check(L, x, kbar);
          worst = std::max(worst, d);
          tab << "identity," << name << ',' << n << ',' << num(d) << ",0\n";
        }
      }
      run.verdict(name + ": identity defect", worst, 1e-12);
    });
    run.check("bounds " + name, [&] {
      double over_i = -1e300, over_iii = -1e300, over_iv = -1e300;
      for (int n = 1; n <= n_max; ++n) {
        auto b = lindblad::lemma_pure(L, x, n);
        over_i = std::max(over_i, b.lhs - b.rhs);
        tab << "pure," << name << ',' << n << ',' << num(b.lhs) << ',' << num(b.rhs) << '\n';
        for (int s = 0; s < samples; ++s) {
          std::vector<int> eps;
          for (int m = 0; m < n; ++m) eps.push_back(std::uniform_int_distribution<int>(-1, 1)(rng));
          auto bm = lindblad::lemma_mixed(L, x, eps);
          over_iii = std::max(over_iii, bm.lhs - bm.rhs);
          tab << "mixed," << name << ',' << n << ',' << num(bm.lhs) << ',' << num(bm.rhs) << '\n';
        }
        for (const auto& other : names) {
          std::vector<int> eps(static_cast<std::size_t>(n), 1);
          auto bp = lindblad::lemma_product(L, x, cfg.op(other), eps, {-1}, {1});
          over_iv = std::max(over_iv, bp.lhs - bp.rhs);
          tab << "product," << name << '*' << other << ',' << n << ',' << num(bp.lhs) << ',' << num(bp.rhs) << '\n';
        }
      }
      run.verdict(name + ": bound (i) lhs - rhs", over_i, 0.0);
      run.verdict(name + ": bound (iii) lhs - rhs", over_iii, 0.0);
      run.verdict(name + ": bound (iv) lhs - rhs", over_iv, 0.0);
    });
  }
  return run.finish();
}

RunReport cmd_selftest(std::uint64_t seed, const fs::path& out) {
  Runner run("selftest", out, "builtin", seed);
  std::ofstream tab(run.result("criteria.csv"));
  tab << "id,title,pass,seconds\n";
  std::ofstream notes(run.result("criteria_notes.txt"));
  for (int id = 1; id <= kCriterionCount; ++id) {
    auto r = run_criterion(id, seed);
    tab << id << ",\"" << r.title << "\"," << (r.pass ? "pass" : "fail") << ',' << num(r.seconds) << '\n';
    for (const auto& n : r.notes) notes << "criterion " << id << " (" << r.title << ")\n" << n << "\n\n";
    for (auto c : r.checks) {
      c.name = std::to_string(id) + " " + r.title + ": " + c.name;
      run.add(std::move(c));
    }
  }
  return run.finish();
}

}  // namespace uhf::harness
