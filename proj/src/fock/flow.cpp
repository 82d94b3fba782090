#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "uhf/fock.hpp"

namespace uhf::fock {

namespace {

constexpr double kMergeTol = 1e-13;
// Per-piece relative floor charged for Eigen's Pade/scaling-squaring expm.
constexpr double kExpmFloor = 1e-14;
constexpr int kMaxPicardDepth = 600;

std::vector<double> breakpoints(const TestFunction& f, const TestFunction& g,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("time grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0) throw DomainError("time grid must be finite and >= 0");
    if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("time grid must be nondecreasing");
  }
  const double t_end = grid.back();
  std::vector<double> pts{0.0};
  pts.insert(pts.end(), grid.begin(), grid.end());
  for (const auto* h : {&f, &g}) {
    for (double e : h->edges()) {
      if (e < t_end) pts.push_back(e);
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > kMergeTol) out.push_back(p);
  }
  return out;
}

// B(t) = L + sum_j g_j(t) Dd_j + conj(f_j(t)) D_j, so that F' = F B for row vectors F.
kernels::SparseMatrix coefficient(const FlowGeneratorSystem& sys, const TestFunction& f,
                                  const TestFunction& g, double t) {
  kernels::SparseMatrix B = sys.L();
  for (std::size_t j = 0; j < sys.noise_count(); ++j) {
    const Complex gj = g.at(sys.noise[j], t);
    const Complex fj = std::conj(f.at(sys.noise[j], t));
    if (gj != 0.0) B += gj * sys.Dd(j);
    if (fj != 0.0) B += fj * sys.D(j);
  }
  B.prune(Complex(0.0));
  return B;
}

// Per-label bound on the coefficient mass pushed outside the window by B(t).
Eigen::VectorXd leak_weights(const FlowGeneratorSystem& sys, const TestFunction& f,
                             const TestFunction& g, double t) {
  Eigen::VectorXd lam = sys.leak_L();
  for (std::size_t j = 0; j < sys.noise_count(); ++j) {
    const double gj = std::abs(g.at(sys.noise[j], t));
    const double fj = std::abs(f.at(sys.noise[j], t));
    if (gj > 0) lam += gj * sys.leak_Dd(j);
    if (fj > 0) lam += fj * sys.leak_D(j);
  }
  return lam;
}

double l1_operator_norm(const kernels::SparseMatrix& B) {
  double best = 0;
  for (Eigen::Index c = 0; c < B.outerSize(); ++c) {
    double s = 0;
    for (kernels::SparseMatrix::InnerIterator it(B, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

Eigen::VectorXd column_l1(const kernels::SparseMatrix& B) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(B.cols());
  for (Eigen::Index c = 0; c < B.outerSize(); ++c) {
    for (kernels::SparseMatrix::InnerIterator it(B, c); it; ++it) out(c) += std::abs(it.value());
  }
  return out;
}

// Comparison matrix: |B| off the diagonal, Re(B) on it.
Eigen::MatrixXd majorant_matrix(const kernels::SparseMatrix& B) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(B.rows(), B.cols());
  for (Eigen::Index c = 0; c < B.outerSize(); ++c) {
    for (kernels::SparseMatrix::InnerIterator it(B, c); it; ++it) {
      K(it.row(), c) = it.row() == c ? it.value().real() : std::abs(it.value());
    }
  }
  return K;
}

// E <- E exp(hK) + int_0^h (M lam) exp(sK) ds via one augmented exponential.
void advance_majorant(Eigen::RowVectorXd& E, const Eigen::MatrixXd& K, const Eigen::VectorXd& Mlam,
                      double h) {
  const Eigen::Index n = K.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = h * K;
  A.row(n).head(n) = h * Mlam.transpose();
  Eigen::MatrixXd X = A.exp();
  Eigen::RowVectorXd aug(n + 1);
  aug.head(n) = E;
  aug(n) = 1.0;
  E = (aug * X).head(n).cwiseMax(0.0);
}

Eigen::RowVectorXcd rk4_rows(Eigen::RowVectorXcd F, const Eigen::MatrixXcd& B, double h, int steps) {
  const double dt = h / steps;
  for (int s = 0; s < steps; ++s) {
    Eigen::RowVectorXcd k1 = F * B;
    Eigen::RowVectorXcd k2 = (F + 0.5 * dt * k1) * B;
    Eigen::RowVectorXcd k3 = (F + 0.5 * dt * k2) * B;
    Eigen::RowVectorXcd k4 = (F + dt * k3) * B;
    F += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return F;
}

int rk4_steps(double h, double norm, int min_steps, double target) {
  const double need = std::ceil(h * norm / target);
  return std::max(min_steps, static_cast<int>(std::min(need, 1e7)));
}

Eigen::RowVectorXcd initial_rows(const FlowGeneratorSystem& sys, const LocalOperator& u,
                                 const LocalOperator& v, Complex e) {
  Eigen::RowVectorXcd F(sys.size());
  for (Eigen::Index b = 0; b < sys.size(); ++b) {
    auto y = LocalOperator::basis(sys.params, sys.closure.basis[static_cast<std::size_t>(b)]);
    F(b) = gns_inner(u, y * v) * e;
  }
  return F;
}

// Builds the padded Picard polynomial rows on every piece and returns F^{(n)} at piece ends.
std::vector<Eigen::RowVectorXcd> picard_sweeps(const std::vector<double>& pts,
                                               const std::vector<Eigen::MatrixXcd>& Bs,
                                               const Eigen::RowVectorXcd& F0, int depth) {
  const std::size_t pieces = Bs.size();
  // coef[i].row(m) multiplies (t - t_i)^m on piece i.
  std::vector<Eigen::MatrixXcd> coef(pieces, Eigen::MatrixXcd(1, F0.size()));
  for (auto& c : coef) c.row(0) = F0;
  std::vector<Eigen::RowVectorXcd> ends(pieces);
  for (int it = 0; it < depth; ++it) {
    Eigen::RowVectorXcd start = F0;
    for (std::size_t i = 0; i < pieces; ++i) {
      const Eigen::Index deg = coef[i].rows();
      Eigen::MatrixXcd next(deg + 1, F0.size());
      next.row(0) = start;
      next.bottomRows(deg) = coef[i] * Bs[i];
      for (Eigen::Index m = 1; m <= deg; ++m) next.row(m) /= static_cast<double>(m);
      const double h = pts[i + 1] - pts[i];
      Eigen::RowVectorXcd end = next.row(deg);
      for (Eigen::Index m = deg - 1; m >= 0; --m) end = end * h + next.row(m);
      coef[i] = std::move(next);
      ends[i] = end;
      start = end;
    }
  }
  if (depth == 0) {
    for (auto& e : ends) e = F0;
  }
  return ends;
}

}  // namespace

double FlowGeneratorSystem::total_leakage() const {
  double s = 0;
  for (const auto& l : closure.leakage) s += l.sum();
  return s;
}

FlowGeneratorSystem build_generator_system(const Lindbladian& L, const SiteWindow& window,
                                           const std::vector<LocalOperator>& seeds,
                                           std::size_t max_basis, kernels::Exec exec) {
  if (window.empty()) throw WindowError("operator window must be nonempty");
  FlowGeneratorSystem sys;
  sys.params = L.params_ptr();
  sys.generator = std::make_shared<const Lindbladian>(L);
  sys.window = window;
  sys.noise = L.noise_indices(window.sites());

  std::vector<WeylLabel> seed_labels{WeylLabel{}};
  if (seeds.empty()) {
    std::size_t count = 1;
    const auto per_site = static_cast<std::size_t>(sys.params->N() * sys.params->N());
    for (std::size_t i = 0; i < window.size() && count <= max_basis; ++i) count *= per_site;
    if (count > max_basis) {
      throw SizeError("window basis exceeds " + std::to_string(max_basis) + " labels");
    }
    seed_labels = oracle::window_basis(*sys.params, window);
  } else {
    for (const auto& x : seeds) {
      for (const auto& [g, c] : x.terms()) seed_labels.push_back(g);
    }
  }

  auto params = sys.params;
  auto gen = sys.generator;
  std::vector<LabelMap> maps;
  for (const auto& j : sys.noise) {
    maps.push_back([gen, params, j](const WeylLabel& g) {
      return lindblad::delta(*gen, j, LocalOperator::basis(params, g));
    });
  }
  for (const auto& j : sys.noise) {
    maps.push_back([gen, params, j](const WeylLabel& g) {
      return lindblad::delta_dag(*gen, j, LocalOperator::basis(params, g));
    });
  }
  maps.push_back([gen, params](const WeylLabel& g) {
    return lindblad::lind_total(*gen, LocalOperator::basis(params, g));
  });
  sys.closure = build_closure(seed_labels, maps, [&](const WeylLabel& g) { return window.contains(g); },
                              max_basis, exec);
  return sys;
}

double vector_bound(const LocalOperator& u, const TestFunction& f, const LocalOperator& v,
                    const TestFunction& g) {
  return gns_norm(u) * gns_norm(v) * std::exp(0.5 * (f.l2_norm_sq() + g.l2_norm_sq()));
}

double picard_error_bound(const LocalOperator& x, const TestFunction& g, double t0, int n,
                          const Lindbladian& L) {
  if (n < 0) throw DomainError("Picard depth must be nonnegative");
  if (t0 < 0) throw DomainError("t0 must be nonnegative");
  const auto& r = L.single_r();
  if (n == 0) return 1.0;
  const double cx = c_const(x);
  if (cx == 0 || t0 == 0) return 0.0;
  const double sup = g.sup_norm();
  const double cg = 2.0 * std::exp(g.gamma(t0)) * (1.0 + sup * sup);
  const double per = std::log(3.0) + 0.5 * std::log(t0 * cg) +
                     std::log1p(oracle::operator_norm(r)) + std::log(2.0 * theta(r, 1) * cx);
  return std::exp(n * per - 0.5 * std::lgamma(n + 1.0));
}

double picard_tail_bound(const LocalOperator& x, const TestFunction& g, double t0, int n,
                         const Lindbladian& L) {
  double sum = 0;
  double prev = picard_error_bound(x, g, t0, n, L);
  for (int m = n + 1; m < n + 200000; ++m) {
    const double term = picard_error_bound(x, g, t0, m, L);
    sum += term;
    if (term == 0 || (term < prev * 0.5 && term < 1e-18 * std::max(sum, 1e-300))) return sum;
    if (term < 1e-300 && term <= prev) return sum;
    prev = term;
  }
  return std::numeric_limits<double>::infinity();
}

MatrixElementTrajectory flow_element(const FlowGeneratorSystem& sys, const LocalOperator& x,
                                     const LocalOperator& u, const TestFunction& f,
                                     const LocalOperator& v, const TestFunction& g,
                                     const std::vector<double>& grid, const FlowOptions& opts) {
  const auto pts = breakpoints(f, g, grid);
  const Eigen::VectorXcd xc = sys.closure.coordinates(x);
  const Eigen::VectorXd xabs = xc.cwiseAbs();
  const double M = vector_bound(u, f, v, g);
  const Eigen::Index n = sys.size();

  MatrixElementTrajectory out;
  out.grid = grid;
  out.rows.resize(static_cast<Eigen::Index>(grid.size()), n);
  out.values.resize(grid.size());
  out.error_estimate.resize(grid.size());
  out.row_error.resize(grid.size());

  Eigen::RowVectorXcd F = initial_rows(sys, u, v, exp_inner(f, g));
  Eigen::RowVectorXd E = Eigen::RowVectorXd::Zero(n);
  double extra = 0;  // error not carried per label (Picard tail)

  std::vector<Eigen::RowVectorXcd> picard_ends;
  if (opts.method == FlowMethod::picard) {
    const double t0 = grid.back();
    int depth = opts.picard_depth;
    if (depth <= 0) {
      depth = 1;
      while (picard_tail_bound(x, g, t0, depth, *sys.generator) * M >= opts.picard_tol / 10) {
        if (++depth > kMaxPicardDepth) {
          throw DivergenceError("Picard bound does not reach the tolerance; shorten t0");
        }
      }
    }
    out.picard_depth = depth;
    out.picard_tail = picard_tail_bound(x, g, t0, depth, *sys.generator) * M;
    std::vector<Eigen::MatrixXcd> Bs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Bs.emplace_back(coefficient(sys, f, g, 0.5 * (pts[i] + pts[i + 1])));
    }
    picard_ends = picard_sweeps(pts, Bs, F, depth);
  }

  std::size_t gi = 0;
  double running = 0;
  double row_running = 0;
  auto record = [&](double t, std::size_t piece_done) {
    while (gi < grid.size() && grid[gi] <= t + 1e-12) {
      if (opts.method == FlowMethod::picard && piece_done > 0) {
        F = picard_ends[piece_done - 1];
        extra = out.picard_tail;
      }
      out.rows.row(static_cast<Eigen::Index>(gi)) = F;
      out.values[gi] = F * xc;
      running = std::max(running, E.dot(xabs) + extra);
      out.error_estimate[gi] = running;
      row_running = std::max(row_running, E.maxCoeff());
      out.row_error[gi] = row_running;
      ++gi;
    }
  };
  record(pts.front(), 0);

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1], h = b - a, mid = 0.5 * (a + b);
    const auto Bs = coefficient(sys, f, g, mid);
    const double bnorm = l1_operator_norm(Bs);
    Eigen::VectorXd lam = leak_weights(sys, f, g, mid);
    switch (opts.method) {
      case FlowMethod::expm: {
        Eigen::MatrixXcd step = (h * Eigen::MatrixXcd(Bs)).exp();
        F = F * step;
        lam.array() += kExpmFloor * std::max(1.0, h * bnorm) / h;
        break;
      }
      case FlowMethod::rk4: {
        const Eigen::MatrixXcd Bd(Bs);
        const int steps = rk4_steps(h, bnorm, opts.substeps, 0.02);
        Eigen::RowVectorXcd coarse = rk4_rows(F, Bd, h, steps);
        Eigen::RowVectorXcd fine = rk4_rows(F, Bd, h, 2 * steps);
        E += (fine - coarse).cwiseAbs() / 15.0;
        F = fine;
        break;
      }
      case FlowMethod::picard:
        break;
    }
    if (lam.maxCoeff() > 0 || E.maxCoeff() > 0) {
      advance_majorant(E, majorant_matrix(Bs), M * lam, h);
    }
    record(b, i + 1);
  }
  out.flagged = !out.error_estimate.empty() && out.error_estimate.back() > opts.leakage_budget;
  return out;
}

PairTrajectory pair_element(const FlowGeneratorSystem& sys,
                            const std::vector<std::pair<LocalOperator, LocalOperator>>& pairs,
                            const LocalOperator& u, const TestFunction& f, const LocalOperator& v,
                            const TestFunction& g, const std::vector<double>& grid,
                            const FlowOptions& opts) {
  const auto pts = breakpoints(f, g, grid);
  const Eigen::Index n = sys.size();
  const double M = vector_bound(u, f, v, g);
  const Complex e = exp_inner(f, g);
  const auto& P = *sys.params;

  std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> coords;
  for (const auto& [x, y] : pairs) coords.emplace_back(sys.closure.coordinates(x), sys.closure.coordinates(y));
  const Eigen::Index id = sys.closure.find(WeylLabel{});

  Eigen::MatrixXcd G(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      auto prod = weyl_mul(P, sys.closure.basis[static_cast<std::size_t>(a)],
                           sys.closure.basis[static_cast<std::size_t>(b)]);
      auto w = LocalOperator::basis(sys.params, prod.label, P.omega_pow(prod.phase_exponent));
      G(a, b) = gns_inner(u, w * v) * e;
    }
  }
  Eigen::RowVectorXcd F = initial_rows(sys, u, v, e);
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(n, n);

  std::vector<kernels::SparseMatrix> D, Dd, absD, absDd;
  std::vector<Eigen::VectorXd> inD, inDd;
  for (std::size_t j = 0; j < sys.noise_count(); ++j) {
    D.push_back(sys.D(j));
    Dd.push_back(sys.Dd(j));
    absD.push_back(sys.D(j).cwiseAbs().cast<Complex>());
    absDd.push_back(sys.Dd(j).cwiseAbs().cast<Complex>());
    inD.push_back(column_l1(sys.D(j)));
    inDd.push_back(column_l1(sys.Dd(j)));
  }
  double itonorm = 0;
  for (std::size_t j = 0; j < D.size(); ++j) itonorm += l1_operator_norm(Dd[j]) * l1_operator_norm(D[j]);

  PairTrajectory out;
  out.grid = grid;
  out.pairs = pairs;
  std::size_t gi = 0;
  std::vector<double> running(pairs.size(), 0.0);
  const double consistency_tol = 1e-9 * std::max(1.0, M);
  auto record = [&](double t) {
    while (gi < grid.size() && grid[gi] <= t + 1e-12) {
      std::vector<Complex> vals;
      std::vector<double> errs;
      for (std::size_t p = 0; p < coords.size(); ++p) {
        const auto& [xc, yc] = coords[p];
        vals.push_back(xc.transpose() * G * yc);
        running[p] = std::max(running[p], xc.cwiseAbs().dot(E.real() * yc.cwiseAbs()));
        errs.push_back(running[p]);
      }
      out.values.push_back(std::move(vals));
      out.error_estimate.push_back(std::move(errs));
      if (id >= 0) {
        const double c = (G.row(id) - F).cwiseAbs().maxCoeff();
        out.consistency = std::max(out.consistency, c);
        if (c > consistency_tol) throw Error("pair consistency violation: G(1, y) differs from F(y)");
      }
      ++gi;
    }
  };
  record(0.0);

  auto rk4_pair = [&](Eigen::MatrixXcd X, const kernels::SparseMatrix& B,
                      const std::vector<kernels::SparseMatrix>& Ddm,
                      const std::vector<kernels::SparseMatrix>& Dm, const Eigen::MatrixXcd* source,
                      double h, int steps) {
    const double dt = h / steps;
    Eigen::MatrixXcd k1, k2, k3, k4;
    auto rhs = [&](const Eigen::MatrixXcd& Y, Eigen::MatrixXcd& out_) {
      kernels::pair_rhs(B, Ddm, Dm, Y, out_, opts.exec);
      if (source) out_ += *source;
    };
    for (int s = 0; s < steps; ++s) {
      rhs(X, k1);
      rhs(X + 0.5 * dt * k1, k2);
      rhs(X + 0.5 * dt * k2, k3);
      rhs(X + dt * k3, k4);
      X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return X;
  };

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1], h = b - a, mid = 0.5 * (a + b);
    const auto B = coefficient(sys, f, g, mid);
    const Eigen::MatrixXcd Bd(B);
    const double nu = 2.0 * l1_operator_norm(B) + itonorm;
    const int steps = rk4_steps(h, nu, opts.substeps, 0.05);
    Eigen::MatrixXcd coarse = rk4_pair(G, B, Dd, D, nullptr, h, steps);
    Eigen::MatrixXcd fine = rk4_pair(G, B, Dd, D, nullptr, h, 2 * steps);
    Eigen::MatrixXcd numerr = (fine - coarse).cwiseAbs().cast<Complex>() / 15.0;
    G = fine;
    // The identity row of G follows the same recursion as F when the step counts agree.
    F = rk4_rows(F, Bd, h, 2 * steps);

    // Leakage source Lambda_ab = lam_a + lam_b + sum_j (|Dd_j a| |D_j b| over the full lattice
    // minus the in-window part), scaled by M.
    const Eigen::VectorXd lam = leak_weights(sys, f, g, mid);
    Eigen::MatrixXd Lam = lam.replicate(1, n) + lam.transpose().replicate(n, 1);
    for (std::size_t j = 0; j < D.size(); ++j) {
      const Eigen::VectorXd fullDd = inDd[j] + sys.leak_Dd(j);
      const Eigen::VectorXd fullD = inD[j] + sys.leak_D(j);
      Lam += fullDd * fullD.transpose() - inDd[j] * inD[j].transpose();
    }
    if (Lam.maxCoeff() > 0 || E.real().maxCoeff() > 0) {
      kernels::SparseMatrix K = majorant_matrix(B).sparseView().cast<Complex>();
      Eigen::MatrixXcd source = (M * Lam).cast<Complex>();
      E = rk4_pair(E, K, absDd, absD, &source, h, 2 * steps);
      E = E.real().cwiseMax(0.0).cast<Complex>();
    }
    E += numerr;
    record(b);
  }
  return out;
}

}  // namespace uhf::fock
