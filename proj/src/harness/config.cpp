#include <cmath>
#include <cstdio>
#include <set>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "uhf/harness.hpp"

namespace uhf::harness {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

double to_double(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ConfigError("malformed number for " + what + ": '" + tok + "'");
  }
  if (used != tok.size()) throw ConfigError("malformed number for " + what + ": '" + tok + "'");
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_raw(const std::string& kind) { return kind == "operator" || kind == "testfunction"; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

oracle::StateSpec parse_rho(const std::string& text, int N, int line) {
  auto rows = split(text, ';');
  if (static_cast<int>(rows.size()) != N) throw ParseError("rho needs " + std::to_string(N) + " rows", line);
  oracle::Matrix rho(N, N);
  for (int i = 0; i < N; ++i) {
    auto cells = split(rows[static_cast<std::size_t>(i)], ',');
    if (static_cast<int>(cells.size()) != N) throw ParseError("rho row needs " + std::to_string(N) + " entries", line);
    for (int j = 0; j < N; ++j) {
      std::stringstream cs(cells[static_cast<std::size_t>(j)]);
      std::string re, im, extra;
      if (!(cs >> re >> im) || (cs >> extra)) throw ParseError("rho entries are 're im' pairs", line);
      rho(i, j) = Complex(to_double(re, "rho"), to_double(im, "rho"));
    }
  }
  try {
    return oracle::StateSpec(rho);
  } catch (const StateError& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace

std::string test_function_to_text(const fock::TestFunction& f, int d) {
  if (f.is_zero()) return "grid 1 1\n";
  const auto& first = f.modes().begin()->second;
  std::string out = "grid " + fmt(first.t_max()) + ' ' + std::to_string(first.cells()) + '\n';
  for (const auto& [m, h] : f.modes()) {
    out += to_string(m.k, d) + '#' + std::to_string(m.member);
    for (const auto& v : h.values()) out += " ; " + fmt(v.real()) + ' ' + fmt(v.imag());
    out += '\n';
  }
  return out;
}

fock::TestFunction parse_test_function(const std::string& text, int d) {
  std::stringstream ss(text);
  std::string line;
  double t_max = 0;
  int cells = 0;
  bool have_grid = false;
  fock::TestFunction f;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!have_grid) {
      std::stringstream gs(line);
      std::string kw, extra;
      if (!(gs >> kw >> t_max >> cells) || kw != "grid" || (gs >> extra)) {
        throw ConfigError("test function must start with 'grid t_max cells'");
      }
      if (cells < 1 || !(t_max > 0)) throw ConfigError("test function grid needs t_max > 0 and cells >= 1");
      have_grid = true;
      continue;
    }
    auto parts = split(line, ';');
    auto site_text = parts.front();
    int member = 0;
    if (auto hash = site_text.find('#'); hash != std::string::npos) {
      member = static_cast<int>(to_double(trim(site_text.substr(hash + 1)), "mode member"));
      site_text = trim(site_text.substr(0, hash));
    }
    if (static_cast<int>(parts.size()) - 1 != cells) {
      throw ConfigError("mode '" + parts.front() + "' lists " + std::to_string(parts.size() - 1) +
                        " values, grid has " + std::to_string(cells) + " cells");
    }
    std::vector<Complex> vals;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      std::stringstream cs(parts[i]);
      std::string re, im, extra;
      if (!(cs >> re >> im) || (cs >> extra)) throw ConfigError("test function values are 're im' pairs");
      vals.emplace_back(to_double(re, "test function"), to_double(im, "test function"));
    }
    f.set({parse_site(site_text, d), member}, fock::StepFunction(t_max, std::move(vals)));
  }
  if (!have_grid) throw ConfigError("test function lacks a grid header");
  return f;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<double>& grid,
                          const std::string& label, const std::vector<Complex>& values,
                          const std::vector<double>& err) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "t,label,re,im,err\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << fmt(grid[i]) << ',' << '"' << label << '"' << ',' << fmt(values[i].real()) << ','
        << fmt(values[i].imag()) << ',' << fmt(i < err.size() ? err[i] : 0.0) << '\n';
  }
}

std::vector<Section> parse_sections(const std::string& text) {
  std::vector<Section> out;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      auto words = split(line.substr(1, line.size() - 2), ' ');
      std::vector<std::string> w;
      for (auto& s : words) {
        if (!s.empty()) w.push_back(s);
      }
      if (w.empty() || w.size() > 2) throw ParseError("section header needs a kind and optional name", line_no);
      Section s;
      s.kind = w[0];
      s.name = w.size() == 2 ? w[1] : "";
      s.line = line_no;
      if (is_raw(s.kind) && s.name.empty()) throw ParseError(s.kind + " section needs a name", line_no);
      out.push_back(std::move(s));
      continue;
    }
    if (out.empty()) throw ParseError("content before the first section", line_no);
    auto& cur = out.back();
    if (is_raw(cur.kind)) {
      cur.body += line + '\n';
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (cur.values.contains(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    cur.values[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  auto sections = parse_sections(text);
  ExperimentConfig cfg;
  cfg.digest = fnv1a_hex(text);
  const Section* algebra = nullptr;
  std::set<std::string> seen;
  for (const auto& s : sections) {
    auto key = s.kind + ' ' + s.name;
    if (!seen.insert(key).second) throw ParseError("duplicate section [" + trim(key) + "]", s.line);
    if (s.kind == "algebra") algebra = &s;
  }
  if (!algebra) throw ConfigError("missing [algebra] section");
  auto need = [](const Section& s, const std::string& k) -> const std::string& {
    auto it = s.values.find(k);
    if (it == s.values.end()) throw ParseError("[" + s.kind + "] needs '" + k + "'", s.line);
    return it->second;
  };
  for (const auto& [k, v] : algebra->values) {
    if (k != "N" && k != "d") throw ParseError("unknown key '" + k + "' in [algebra]", algebra->line);
  }
  const int N = static_cast<int>(to_double(need(*algebra, "N"), "N"));
  const int d = static_cast<int>(to_double(need(*algebra, "d"), "d"));
  if (N < 2) throw ParseError("N must be at least 2", algebra->line);
  if (d < 1 || d > kMaxLatticeDim) throw ParseError("d must lie in 1..4", algebra->line);
  cfg.params = AlgebraParams::make(N, d);

  for (const auto& s : sections) {
    try {
      if (s.kind == "algebra") continue;
      if (s.kind == "operator") {
        cfg.operators.emplace(s.name, parse_operator(s.body, cfg.params));
      } else if (s.kind == "testfunction") {
        cfg.test_functions.emplace(s.name, parse_test_function(s.body, d));
      } else if (s.kind == "generator") {
        GeneratorSpec g;
        const auto& kind = need(s, "kind");
        if (kind == "translation_covariant") {
          g.kind = lindblad::GeneratorKind::translation_covariant;
        } else if (kind == "partial_state") {
          g.kind = lindblad::GeneratorKind::partial_state;
        } else if (kind == "perturbed") {
          g.kind = lindblad::GeneratorKind::perturbed;
        } else {
          throw ParseError("unknown generator kind '" + kind + "'", s.line);
        }
        for (const auto& [k, v] : s.values) {
          if (k == "kind") continue;
          if (k == "kraus") {
            for (auto& n : split(v, ',')) {
              if (!n.empty()) g.kraus.push_back(n);
            }
          } else if (k == "unital") {
            if (v != "true" && v != "false") throw ParseError("unital must be true or false", s.line);
            g.unital = v == "true";
          } else if (k == "rho") {
            g.state = parse_rho(v, N, s.line);
          } else if (k == "c") {
            g.c = to_double(v, "c");
            if (g.c < 0) throw ParseError("c must be nonnegative", s.line);
          } else {
            throw ParseError("unknown key '" + k + "' in [generator]", s.line);
          }
        }
        if (g.kind != lindblad::GeneratorKind::translation_covariant && !g.state) {
          throw ParseError("generator kind '" + kind + "' needs rho", s.line);
        }
        if (g.kind != lindblad::GeneratorKind::partial_state && g.kraus.empty()) {
          throw ParseError("generator kind '" + kind + "' needs kraus", s.line);
        }
        cfg.generator = std::move(g);
      } else if (s.kind == "run") {
        cfg.run = s.values;
        if (auto it = s.values.find("seed"); it != s.values.end()) {
          cfg.seed = static_cast<std::uint64_t>(to_double(it->second, "seed"));
        }
      } else {
        throw ParseError("unknown section kind '" + s.kind + "'", s.line);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), s.line);
    }
  }
  if (cfg.generator) {
    for (const auto& n : cfg.generator->kraus) {
      if (!cfg.operators.contains(n)) throw ConfigError("kraus operator '" + n + "' is not defined");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

lindblad::Lindbladian ExperimentConfig::build_generator() const {
  if (!generator) throw ConfigError("missing [generator] section");
  const auto& g = *generator;
  std::vector<LocalOperator> ops;
  for (const auto& n : g.kraus) ops.push_back(op(n));
  switch (g.kind) {
    case lindblad::GeneratorKind::translation_covariant:
      return lindblad::Lindbladian::translation_covariant(lindblad::KrausFamily::make(ops, g.unital));
    case lindblad::GeneratorKind::partial_state:
      return lindblad::Lindbladian::partial_state(params, *g.state);
    case lindblad::GeneratorKind::perturbed:
      return lindblad::Lindbladian::perturbed(params, *g.state, lindblad::KrausFamily::make(ops, g.unital), g.c);
  }
  throw ConfigError("unknown generator kind");
}

const LocalOperator& ExperimentConfig::op(const std::string& name) const {
  auto it = operators.find(name);
  if (it == operators.end()) throw ConfigError("operator '" + name + "' is not defined");
  return it->second;
}

fock::TestFunction ExperimentConfig::test_function(const std::string& name) const {
  if (name.empty() || name == "0") return {};
  auto it = test_functions.find(name);
  if (it == test_functions.end()) throw ConfigError("test function '" + name + "' is not defined");
  return it->second;
}

std::vector<std::string> ExperimentConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  auto it = run.find(key);
  if (it == run.end()) return out;
  for (auto& n : split(it->second, ',')) {
    if (!n.empty()) out.push_back(n);
  }
  return out;
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = run.find(key);
  return it == run.end() ? fallback : it->second;
}

double ExperimentConfig::number(const std::string& key, double fallback) const {
  auto it = run.find(key);
  return it == run.end() ? fallback : to_double(it->second, key);
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
  return static_cast<int>(number(key, fallback));
}

std::vector<double> ExperimentConfig::times(const std::string& key, const std::string& fallback) const {
  const std::string spec = get(key, fallback);
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    auto p = split(spec, ':');
    if (p.size() != 3) throw ConfigError(key + " range must be start:step:end");
    const double a = to_double(p[0], key), h = to_double(p[1], key), b = to_double(p[2], key);
    if (!(h > 0) || b < a) throw ConfigError(key + " range needs step > 0 and end >= start");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (n > 1000000) throw ConfigError(key + " range is too long");
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    for (auto& t : split(spec, ',')) out.push_back(to_double(t, key));
  }
  if (out.empty()) throw ConfigError(key + " is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0 || (i > 0 && out[i] < out[i - 1])) throw ConfigError(key + " must be nondecreasing and >= 0");
  }
  return out;
}

bool RunReport::all_pass() const {
  for (const auto& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

void write_report(const std::filesystem::path& path, const RunReport& report) {
  nlohmann::ordered_json j;
  j["command"] = report.command;
  j["inputs_digest"] = report.inputs_digest;
  j["seed"] = report.seed;
  j["outputs"] = report.outputs;
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : report.verdicts) {
    nlohmann::ordered_json e;
    e["name"] = v.name;
    e["pass"] = v.pass;
    e["measured"] = v.measured;
    e["threshold"] = v.threshold;
    if (!v.detail.empty()) e["detail"] = v.detail;
    j["verdicts"].push_back(e);
  }
  j["all_pass"] = report.all_pass();
  j["wall_time_s"] = report.wall_time;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace uhf::harness
