#include "hdcca/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace hdcca {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

struct Cursor {
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line) + " (" + key + "): " + what);
  }
};

double parse_real(const std::string& raw, const Cursor& at) {
  std::string s = trim(raw);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) return factor;
  }
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    at.fail("expected a number, got '" + raw + "'");
  return v * factor;
}

template <typename Int>
Int parse_int(const std::string& raw, const Cursor& at) {
  const std::string s = trim(raw);
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    at.fail("expected an integer, got '" + raw + "'");
  return v;
}

bool parse_bool(const std::string& raw, const Cursor& at) {
  const std::string s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  at.fail("expected true or false, got '" + raw + "'");
}

std::string parse_string(const std::string& raw, const Cursor& at) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') at.fail("unterminated string");
    return s.substr(1, s.size() - 2);
  }
  if (s.empty()) at.fail("empty value");
  return s;
}

std::vector<std::string> list_items(const std::string& raw, const Cursor& at) {
  const std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    at.fail("expected a list like [a, b]");
  std::vector<std::string> items;
  std::stringstream in(s.substr(1, s.size() - 2));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) at.fail("empty list item");
    items.push_back(item);
  }
  if (items.empty()) at.fail("list must not be empty");
  return items;
}

}  // namespace

SpikedParams GridConfig::base_params() const {
  SpikedParams p;
  p.sigma2_x = sigma2_x;
  p.sigma2_y = sigma2_y;
  p.tau2_x = tau2_x;
  p.tau2_y = tau2_y;
  p.rho = rho;
  p.theta_x = theta_x;
  p.theta_y = theta_y;
  return p;
}

void validate_config(const GridConfig& cfg) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (cfg.n_values.empty()) fail("n_values must not be empty");
  if (cfg.d_values.empty()) fail("d_values must not be empty");
  if (cfg.alpha_values.empty()) fail("alpha_values must not be empty");
  if (cfg.reps < 1) fail("reps must be >= 1");
  if (cfg.k < 1) fail("k must be >= 1");
  if (!(cfg.rank_tol >= 0.0 && cfg.rank_tol < 1.0)) fail("rank_tol must lie in [0, 1)");
  for (long n : cfg.n_values) {
    if (n < 2) fail("every n must be >= 2");
    if (cfg.k > (cfg.center ? n - 1 : n)) fail("k exceeds the number of sample directions");
  }
  for (long d : cfg.d_values)
    if (cfg.k > d) fail("k exceeds dimension d");
  for (double a : cfg.alpha_values)
    if (a == 1.0) fail("alpha = 1 is the unsupported boundary case");
  auto unique = [](auto v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!unique(cfg.n_values) || !unique(cfg.d_values) || !unique(cfg.alpha_values))
    fail("grid value lists must not contain duplicates");

  SpikedParams p = cfg.base_params();
  for (long d : cfg.d_values) {
    for (double a : cfg.alpha_values) {
      p.d = d;
      p.alpha = a;
      try {
        validate_params(p);
      } catch (const ParameterError& e) {
        fail(e.what());
      }
    }
  }
}

GridConfig parse_grid_config(const std::string& text) {
  GridConfig cfg;
  using Setter = std::function<void(const std::string&, const Cursor&)>;
  const std::map<std::string, Setter> setters{
      {"n_values", [&](auto& v, auto& at) {
         cfg.n_values.clear();
         for (auto& s : list_items(v, at)) cfg.n_values.push_back(parse_int<long>(s, at));
       }},
      {"d_values", [&](auto& v, auto& at) {
         cfg.d_values.clear();
         for (auto& s : list_items(v, at)) cfg.d_values.push_back(parse_int<long>(s, at));
       }},
      {"alpha_values", [&](auto& v, auto& at) {
         cfg.alpha_values.clear();
         for (auto& s : list_items(v, at)) cfg.alpha_values.push_back(parse_real(s, at));
       }},
      {"rho", [&](auto& v, auto& at) { cfg.rho = parse_real(v, at); }},
      {"theta_x", [&](auto& v, auto& at) { cfg.theta_x = parse_real(v, at); }},
      {"theta_y", [&](auto& v, auto& at) { cfg.theta_y = parse_real(v, at); }},
      {"sigma2_x", [&](auto& v, auto& at) { cfg.sigma2_x = parse_real(v, at); }},
      {"sigma2_y", [&](auto& v, auto& at) { cfg.sigma2_y = parse_real(v, at); }},
      {"tau2_x", [&](auto& v, auto& at) { cfg.tau2_x = parse_real(v, at); }},
      {"tau2_y", [&](auto& v, auto& at) { cfg.tau2_y = parse_real(v, at); }},
      {"reps", [&](auto& v, auto& at) { cfg.reps = parse_int<int>(v, at); }},
      {"k", [&](auto& v, auto& at) { cfg.k = parse_int<int>(v, at); }},
      {"master_seed", [&](auto& v, auto& at) { cfg.master_seed = parse_int<std::uint64_t>(v, at); }},
      {"center", [&](auto& v, auto& at) { cfg.center = parse_bool(v, at); }},
      {"rank_tol", [&](auto& v, auto& at) { cfg.rank_tol = parse_real(v, at); }},
      {"out_dir", [&](auto& v, auto& at) { cfg.out_dir = parse_string(v, at); }},
  };

  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const Cursor at{line_no, trim(body.substr(0, eq))};
    const auto it = setters.find(at.key);
    if (it == setters.end()) at.fail("unknown key");
    if (!seen.insert(at.key).second) at.fail("key given twice");
    it->second(body.substr(eq + 1), at);
  }
  validate_config(cfg);
  return cfg;
}

GridConfig load_grid_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid_config(buf.str());
}

}  // namespace hdcca
