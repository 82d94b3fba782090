#pragma once

// Config-driven experiment runner and the acceptance criteria suite.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uhf/fock.hpp"
#include "uhf/lindblad.hpp"

namespace uhf::harness {

// ---- text formats ----

/// `grid t_max cells` followed by one line per mode: `site[#member] ; re im ; re im ; ...`.
std::string test_function_to_text(const fock::TestFunction& f, int d);
fock::TestFunction parse_test_function(const std::string& text, int d);

/// Writes `t,label,re,im,err` rows.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<double>& grid,
                          const std::string& label, const std::vector<Complex>& values,
                          const std::vector<double>& err);

// ---- config ----

struct Section {
  std::string kind;
  std::string name;
  int line = 0;
  std::map<std::string, std::string> values;
  /// Raw body lines for operator and test-function sections.
  std::string body;
};

/// Sections `[kind]` or `[kind name]` with `key = value` lines. Lines starting with `#` are
/// comments; trailing `# ...` comments are stripped only in key-value sections because raw
/// test-function bodies use `#` to separate a mode's site from its member index.
std::vector<Section> parse_sections(const std::string& text);

struct GeneratorSpec {
  lindblad::GeneratorKind kind = lindblad::GeneratorKind::translation_covariant;
  std::vector<std::string> kraus;
  bool unital = false;
  std::optional<oracle::StateSpec> state;
  double c = 0;
};

struct ExperimentConfig {
  ParamsPtr params;
  std::optional<GeneratorSpec> generator;
  std::map<std::string, LocalOperator> operators;
  std::map<std::string, fock::TestFunction> test_functions;
  /// Keys of the [run] section.
  std::map<std::string, std::string> run;
  std::uint64_t seed = 20261016;
  std::string digest;

  lindblad::Lindbladian build_generator() const;
  const LocalOperator& op(const std::string& name) const;
  fock::TestFunction test_function(const std::string& name) const;
  std::vector<std::string> list(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  /// `a:h:b` (inclusive range) or a comma-separated list.
  std::vector<double> times(const std::string& key, const std::string& fallback) const;
};

/// Throws ConfigError (ParseError with a line number where one applies).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// ---- reports ----

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::string inputs_digest;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::vector<Verdict> verdicts;
  double wall_time = 0;

  bool all_pass() const;
  void add(Verdict v) { verdicts.push_back(std::move(v)); }
};

void write_report(const std::filesystem::path& path, const RunReport& report);

// ---- acceptance ----

constexpr int kCriterionCount = 13;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<Verdict> checks;
  double seconds = 0;
  /// Extra tables (rate table etc.) for the report.
  std::vector<std::string> notes;
};

const char* criterion_title(int id);
/// Runs criterion id (1..13) with the given seed. Engine errors are reported as failures.
CriterionResult run_criterion(int id, std::uint64_t seed);
/// One line: `[PASS] 07 title  (measured ... ) 1.23 s`.
std::string format_criterion(const CriterionResult& r);

// ---- commands ----

enum class ExitCode { pass = 0, verdict_fail = 1, config_error = 2, engine_error = 3 };

RunReport cmd_evolve(const ExperimentConfig& cfg, const std::filesystem::path& out);
RunReport cmd_ergodicity(const ExperimentConfig& cfg, const std::filesystem::path& out);
RunReport cmd_flow(const ExperimentConfig& cfg, const std::filesystem::path& out);
RunReport cmd_lemma(const ExperimentConfig& cfg, const std::filesystem::path& out);
RunReport cmd_selftest(std::uint64_t seed, const std::filesystem::path& out);

}  // namespace uhf::harness
