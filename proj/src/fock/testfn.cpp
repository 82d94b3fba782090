#include <algorithm>
#include <cmath>

#include "uhf/fock.hpp"

namespace uhf::fock {

StepFunction::StepFunction(double t_max, std::vector<Complex> values)
    : t_max_(t_max), values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("step function needs at least one cell");
  if (!(t_max_ > 0) || !std::isfinite(t_max_)) throw ConfigError("step function t_max must be positive");
}

StepFunction StepFunction::constant(double t_max, int cells, Complex v) {
  if (cells < 1) throw ConfigError("step function needs at least one cell");
  return {t_max, std::vector<Complex>(static_cast<std::size_t>(cells), v)};
}

StepFunction StepFunction::indicator(double t_max, int cells, double t_end, Complex v) {
  auto f = constant(t_max, cells, 0.0);
  const double dt = t_max / cells;
  for (int i = 0; i < cells; ++i) {
    if ((i + 0.5) * dt < t_end) f.values_[static_cast<std::size_t>(i)] = v;
  }
  return f;
}

Complex StepFunction::at(double t) const {
  if (t < 0 || t >= t_max_) return 0.0;
  auto i = static_cast<std::size_t>(std::floor(t / dt()));
  return values_[std::min(i, values_.size() - 1)];
}

double StepFunction::l2_norm_sq() const {
  double s = 0;
  for (const auto& v : values_) s += std::norm(v);
  return s * dt();
}

void TestFunction::set(const NoiseMode& mode, StepFunction f) {
  for (const auto& [m, h] : modes_) {
    if (m == mode) continue;
    if (h.cells() != f.cells() || h.t_max() != f.t_max()) {
      throw ConfigError("test function modes must share one grid");
    }
    break;
  }
  modes_.insert_or_assign(mode, std::move(f));
}

Complex TestFunction::at(const NoiseMode& mode, double t) const {
  auto it = modes_.find(mode);
  return it == modes_.end() ? Complex(0.0) : it->second.at(t);
}

std::vector<double> TestFunction::edges() const {
  if (modes_.empty()) return {};
  const auto& f = modes_.begin()->second;
  std::vector<double> out;
  for (int i = 0; i <= f.cells(); ++i) out.push_back(i * f.dt());
  out.back() = f.t_max();
  return out;
}

double TestFunction::norm_sq_at(double t) const {
  double s = 0;
  for (const auto& [m, f] : modes_) s += std::norm(f.at(t));
  return s;
}

double TestFunction::l2_norm_sq() const {
  double s = 0;
  for (const auto& [m, f] : modes_) s += f.l2_norm_sq();
  return s;
}

double TestFunction::sup_norm() const {
  if (modes_.empty()) return 0;
  const auto& first = modes_.begin()->second;
  double best = 0;
  for (int i = 0; i < first.cells(); ++i) {
    double s = 0;
    for (const auto& [m, f] : modes_) s += std::norm(f.values()[static_cast<std::size_t>(i)]);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double TestFunction::gamma(double t0) const {
  double g = t0;
  if (modes_.empty()) return g;
  const auto& first = modes_.begin()->second;
  const double dt = first.dt();
  for (int i = 0; i < first.cells(); ++i) {
    const double a = i * dt;
    const double b = std::min((i + 1) * dt, t0);
    if (b <= a) break;
    double s = 0;
    for (const auto& [m, f] : modes_) s += std::norm(f.values()[static_cast<std::size_t>(i)]);
    g += s * (b - a);
  }
  return g;
}

TestFunction TestFunction::shifted(const Site& j) const {
  TestFunction out;
  for (const auto& [m, f] : modes_) out.modes_.emplace(NoiseMode{m.k - j, m.member}, f);
  return out;
}

TestFunction TestFunction::restricted(const std::vector<Site>& sites) const {
  TestFunction out;
  for (const auto& [m, f] : modes_) {
    if (std::find(sites.begin(), sites.end(), m.k) != sites.end()) out.modes_.emplace(m, f);
  }
  return out;
}

TestFunction TestFunction::without(const std::vector<Site>& sites) const {
  TestFunction out;
  for (const auto& [m, f] : modes_) {
    if (std::find(sites.begin(), sites.end(), m.k) == sites.end()) out.modes_.emplace(m, f);
  }
  return out;
}

Complex exp_inner(const TestFunction& f, const TestFunction& g) {
  Complex s = 0;
  for (const auto& [m, fm] : f.modes()) {
    auto it = g.modes().find(m);
    if (it == g.modes().end()) continue;
    const auto& gm = it->second;
    if (gm.cells() != fm.cells() || gm.t_max() != fm.t_max()) {
      throw ConfigError("exp_inner needs test functions on a shared grid");
    }
    Complex a = 0;
    for (int i = 0; i < fm.cells(); ++i) {
      a += std::conj(fm.values()[static_cast<std::size_t>(i)]) * gm.values()[static_cast<std::size_t>(i)];
    }
    s += a * fm.dt();
  }
  return std::exp(s);
}

}  // namespace uhf::fock
