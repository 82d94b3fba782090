#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "json.hpp"
#include "uhf/harness.hpp"

using namespace uhf;
using namespace uhf::harness;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

const char* kFlowConfig = R"(# vacuum flow
[algebra]
N = 2
d = 1

[generator]
kind = translation_covariant
kraus = r

[operator r]
0.8 0 ; 0:1,1

[operator x]
1 0 ; 0:1,0
0.3 0 ; 1:0,1

[operator u]
1 0 ;
0.2 0.1 ; 0:1,0

[run]
observables = x
u = u
t_grid = 0:0.5:2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("uhfflow-test-" + name);
  fs::remove_all(d);
  return d;
}

std::string with_run(const std::string& base, const std::string& key, const std::string& value) {
  auto pos = base.find("[run]\n");
  return base.substr(0, pos + 6) + key + " = " + value + "\n" + base.substr(pos + 6);
}

}  // namespace

TEST_CASE("test function text round trip") {
  Rng rng(51);
  std::normal_distribution<double> g;
  for (int d : {1, 2}) {
    fock::TestFunction f;
    for (int m = 0; m < 3; ++m) {
      std::vector<Complex> v;
      for (int c = 0; c < 5; ++c) v.emplace_back(g(rng), g(rng));
      Site s = Site::along(d - 1, m - 1);
      f.set({s, m}, fock::StepFunction(1.5, v));
    }
    auto back = parse_test_function(test_function_to_text(f, d), d);
    REQUIRE(back.modes().size() == f.modes().size());
    for (const auto& [mode, step] : f.modes()) {
      const auto& other = back.modes().at(mode);
      CHECK(other.t_max() == step.t_max());
      CHECK(other.values() == step.values());
    }
  }
  CHECK(parse_test_function(test_function_to_text({}, 1), 1).is_zero());
  CHECK_THROWS_AS(parse_test_function("0 ; 1 0\n", 1), ConfigError);
  CHECK_THROWS_AS(parse_test_function("grid 1 2\n0 ; 1 0\n", 1), ConfigError);
}

TEST_CASE("config parsing") {
  auto cfg = parse_config(kFlowConfig);
  CHECK(cfg.params->N() == 2);
  CHECK(cfg.operators.size() == 3);
  CHECK(cfg.times("t_grid", "").size() == 5);
  CHECK(cfg.list("observables") == std::vector<std::string>{"x"});
  CHECK(cfg.op("u").term_count() == 2);
  CHECK(cfg.test_function("").is_zero());
  CHECK(cfg.build_generator().member_count() == 1);
  CHECK(parse_config(with_run(kFlowConfig, "t_list", "0, 0.5,1")).times("t_list", "").size() == 3);
  CHECK(parse_config(kFlowConfig).digest == cfg.digest);
  CHECK(parse_config(with_run(kFlowConfig, "seed", "7")).seed == 7);
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    } catch (const ConfigError&) {
      return -1;
    }
    return 0;
  };
  CHECK(line_of("[algebra]\nN = 2\nd = 1\n[bogus]\nk = v\n") == 4);
  CHECK(line_of("[algebra]\nN = 2\nd = 9\n") == 1);
  CHECK(line_of("[algebra]\nN = 2\nd = 1\nfoo\n") == 4);
  CHECK(line_of("[algebra]\nN = 2\nd = 1\n[operator x]\n1 0 ; 0:5,0\n") == 4);
  CHECK(line_of("[run]\nx = 1\n") == -1);
  std::string bad_rho = "[algebra]\nN = 2\nd = 1\n[generator]\nkind = partial_state\nrho = 2 0, 0 0 ; 0 0, 0 0\n";
  CHECK(line_of(bad_rho) == 4);
  CHECK_THROWS_AS(parse_config(with_run(kFlowConfig, "t_bad", "1:0:2")).times("t_bad", ""), ConfigError);
  CHECK_THROWS_AS(parse_config(with_run(kFlowConfig, "t_bad", "2,1")).times("t_bad", ""), ConfigError);
}

TEST_CASE("evolve command at t = 0 returns the input") {
  auto text = std::string(kFlowConfig);
  text.replace(text.find("t_grid = 0:0.5:2"), 16, "t_grid = 0");
  auto out = scratch("evolve0");
  auto rep = cmd_evolve(parse_config(text), out);
  CHECK(rep.all_pass());
  auto csv = slurp(out / "results" / "evolve_x.csv");
  CHECK(csv.find("\"0:1,0\",1,0") != std::string::npos);
  CHECK(csv.find("\"1:0,1\",0.29999999999999999,0") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(j["command"] == "evolve");
  CHECK(j["verdicts"].size() == rep.verdicts.size());
  for (const auto& v : j["verdicts"]) CHECK(v.contains("threshold"));
}

TEST_CASE("flow command vacuum reduction and determinism") {
  auto cfg = parse_config(kFlowConfig);
  auto a = scratch("flow-a");
  auto b = scratch("flow-b");
  auto ra = cmd_flow(cfg, a);
  auto rb = cmd_flow(cfg, b);
  CHECK(ra.all_pass());
  bool has_vacuum = false;
  for (const auto& v : ra.verdicts) has_vacuum = has_vacuum || v.name.find("vacuum") != std::string::npos;
  CHECK(has_vacuum);
  for (const auto& o : ra.outputs) CHECK(slurp(a / o) == slurp(b / o));

  // The vacuum flow equals <u, P_t(x) u> from the evolve command output.
  auto e = scratch("flow-e");
  cmd_evolve(cfg, e);
  std::ifstream ev(e / "results" / "evolve_x.csv");
  std::string line;
  std::getline(ev, line);
  std::map<double, LocalOperator> at;
  while (std::getline(ev, line)) {
    auto q1 = line.find('"'), q2 = line.find('"', q1 + 1);
    const double t = std::stod(line.substr(0, q1 - 1));
    std::stringstream rest(line.substr(q2 + 2));
    std::string re, im;
    std::getline(rest, re, ',');
    std::getline(rest, im, ',');
    at.try_emplace(t, cfg.params);
    at.at(t).add_term(parse_label(line.substr(q1 + 1, q2 - q1 - 1), *cfg.params), Complex(std::stod(re), std::stod(im)));
  }
  std::ifstream fl(a / "results" / "flow_x.csv");
  std::getline(fl, line);
  const auto& u = cfg.op("u");
  int rows = 0;
  while (std::getline(fl, line)) {
    std::stringstream ss(line);
    std::string t, lbl, re, im;
    std::getline(ss, t, ',');
    std::getline(ss, lbl, ',');
    std::getline(ss, re, ',');
    std::getline(ss, im, ',');
    const Complex ref = gns_inner(u, at.at(std::stod(t)) * u);
    CHECK(std::abs(Complex(std::stod(re), std::stod(im)) - ref) < 1e-8);
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("engine failures still write the report") {
  auto text = with_run(kFlowConfig, "max_basis", "1");
  auto out = scratch("fail");
  CHECK_THROWS_AS(cmd_flow(parse_config(text), out), Error);
  auto j = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(j["all_pass"] == false);
}

TEST_CASE("lemma and ergodicity commands") {
  const char* text = R"([algebra]
N = 2
d = 1
[generator]
kind = perturbed
rho = 0.7 0, 0 0 ; 0 0, 0.3 0
kraus = r
unital = true
c = 0.05
[operator r]
1 0 ; 0:1,0
[operator x]
1 0 ; 0:0,1
[run]
observables = x
t_grid = 0:0.25:8
)";
  auto rep = cmd_ergodicity(parse_config(text), scratch("ergo"));
  CHECK(rep.all_pass());
  const char* lemma = R"([algebra]
N = 2
d = 1
[generator]
kind = translation_covariant
kraus = r
[operator r]
0.5 0 ; 0:1,0
0.5 0 ; 1:1,0
[operator x]
1 0 ; 0:0,1
[run]
observables = x
n_max = 2
samples = 3
)";
  auto lr = cmd_lemma(parse_config(lemma), scratch("lemma"));
  CHECK(lr.all_pass());
  CHECK(lr.verdicts.size() == 4);
}

TEST_CASE("criterion formatting") {
  CriterionResult r;
  r.id = 13;
  r.title = criterion_title(13);
  r.pass = true;
  r.checks.push_back({"x", true, 0.0, 0.0, ""});
  auto s = format_criterion(r);
  CHECK(s.rfind("[PASS] 13", 0) == 0);
  CHECK(s.find('\n') == std::string::npos);
  CHECK_THROWS_AS(criterion_title(14), DomainError);
}
