#include <charconv>
#include <cstdio>
#include <sstream>

#include "uhf/weyl.hpp"

namespace uhf {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::int64_t parse_int(const std::string& tok, const std::string& what) {
  std::int64_t v = 0;
  auto t = trim(tok);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
    throw ConfigError("malformed " + what + ": '" + tok + "'");
  }
  return v;
}

double parse_double(const std::string& tok) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ConfigError("malformed number: '" + tok + "'");
  }
  if (used != tok.size()) throw ConfigError("malformed number: '" + tok + "'");
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Site parse_site(const std::string& text, int d) {
  std::vector<std::int64_t> coords;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) coords.push_back(parse_int(tok, "site coordinate"));
  if (static_cast<int>(coords.size()) != d) {
    throw ConfigError("site '" + text + "' has " + std::to_string(coords.size()) +
                      " coordinates, expected " + std::to_string(d));
  }
  Site s;
  for (std::size_t i = 0; i < coords.size(); ++i) s.coord[i] = coords[i];
  return s;
}

WeylLabel parse_label(const std::string& text, const AlgebraParams& params) {
  std::vector<WeylLabel::Entry> entries;
  std::stringstream ss(text);
  std::string item;
  while (ss >> item) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("label entry '" + item + "' lacks ':'");
    Site s = parse_site(item.substr(0, colon), params.d());
    auto rest = item.substr(colon + 1);
    auto comma = rest.find(',');
    if (comma == std::string::npos) throw ConfigError("label entry '" + item + "' lacks alpha,beta");
    auto a = parse_int(rest.substr(0, comma), "alpha");
    auto b = parse_int(rest.substr(comma + 1), "beta");
    if (a < 0 || a >= params.N() || b < 0 || b >= params.N()) {
      throw ConfigError("exponent out of range in '" + item + "'");
    }
    for (const auto& e : entries) {
      if (e.first == s) throw ConfigError("site repeated in label '" + text + "'");
    }
    entries.push_back({s, {static_cast<int>(a), static_cast<int>(b)}});
  }
  return WeylLabel(std::move(entries), params.N());
}

LocalOperator parse_operator(const std::string& text, ParamsPtr params) {
  LocalOperator x(params);
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto semi = line.find(';');
    if (semi == std::string::npos) throw ConfigError("operator term '" + line + "' lacks ';'");
    std::stringstream cs(line.substr(0, semi));
    std::string re, im, extra;
    if (!(cs >> re >> im) || (cs >> extra)) {
      throw ConfigError("operator term '" + line + "' needs 're im' before ';'");
    }
    x.add_term(parse_label(line.substr(semi + 1), *params),
               Complex(parse_double(re), parse_double(im)));
  }
  return x;
}

std::string label_to_text(const WeylLabel& g, int d) {
  std::string out;
  for (const auto& [s, e] : g.entries()) {
    if (!out.empty()) out += ' ';
    out += to_string(s, d) + ':' + std::to_string(e.alpha) + ',' + std::to_string(e.beta);
  }
  return out;
}

std::string to_text(const LocalOperator& x) {
  std::string out;
  for (const auto& [g, c] : x.terms()) {
    out += fmt_double(c.real()) + ' ' + fmt_double(c.imag()) + " ;";
    auto lbl = label_to_text(g, x.params().d());
    if (!lbl.empty()) out += ' ' + lbl;
    out += '\n';
  }
  return out;
}

}  // namespace uhf
