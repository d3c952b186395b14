#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blab::io {

/// Parse failure; line() is 0 for whole-file problems and -1 for --set overrides.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg) : std::runtime_error(format(line, msg)), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  static std::string format(int line, const std::string& msg) {
    if (line > 0) return "line " + std::to_string(line) + ": " + msg;
    if (line < 0) return "--set: " + msg;
    return msg;
  }
  int line_;
};

enum class KeyType { Int, UInt, Double, Bool, String, Enum, DoubleList, StringList };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string default_value;  // empty + required => must be given
  bool required = false;
  std::vector<std::string> choices;  // Enum / StringList
  std::string help;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_int(std::string_view s, long long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

inline bool parse_double(std::string_view s, double& out) {
  if (s == "inf" || s == "+inf" || s == "infinity") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty() && std::isfinite(out);
}

inline std::string type_name(KeyType t) {
  switch (t) {
    case KeyType::Int: return "integer";
    case KeyType::UInt: return "unsigned integer";
    case KeyType::Double: return "number";
    case KeyType::Bool: return "boolean (true|false)";
    case KeyType::String: return "string";
    case KeyType::Enum: return "choice";
    case KeyType::DoubleList: return "comma-separated numbers";
    case KeyType::StringList: return "comma-separated names";
  }
  return "value";
}

}  // namespace detail

/// Keys understood by every subcommand.
inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"subcommand", KeyType::Enum, "", true, {"simulate", "td-run", "verify", "analyze"}, "which pipeline runs"},
      {"seed", KeyType::UInt, "0", false, {}, "random seed"},
      {"output_dir", KeyType::String, "out", false, {}, "directory for all outputs"},
      {"grid.n", KeyType::Int, "64", false, {}, "points per axis, power of two >= 8"},
      {"grid.period", KeyType::Double, "6.283185307179586", false, {}, "torus side length"},
      {"grid.dealias", KeyType::Double, "0.6666666666666666", false, {}, "dealiasing radius fraction"},

      {"sim.alpha", KeyType::Double, "1", false, {}, "dissipation exponent in (0, 2]"},
      {"sim.dt", KeyType::Double, "0.002", false, {}, "time step"},
      {"sim.t_end", KeyType::Double, "5", false, {}, "final time"},
      {"sim.cfl_safety", KeyType::Double, "0.5", false, {}, "CFL safety factor in (0, 1]"},
      {"sim.initial", KeyType::Enum, "desk", false, {"desk", "random", "snapshot"}, "initial data preset"},
      {"sim.snapshot_in", KeyType::String, "", false, {}, "BLAB1 file used when sim.initial = snapshot"},
      {"sim.random_slope", KeyType::Double, "-2", false, {}, "spectral slope of random theta0"},
      {"sim.monitor_p", KeyType::Double, "4", false, {}, "exponent p of the a priori monitor"},
      {"sim.theta_p", KeyType::DoubleList, "2,4", false, {}, "extra L^p norms of theta"},
      {"sim.monitor_every", KeyType::Int, "1", false, {}, "record every k-th step"},
      {"sim.snapshot_every", KeyType::Int, "0", false, {}, "snapshot every k-th step (0: final only)"},
      {"sim.gamma_budget", KeyType::Bool, "true", false, {}, "run the Gamma budget check (alpha = 1)"},
      {"sim.phi_level", KeyType::Int, "1", false, {}, "nesting depth of the Phi_k fit"},

      {"td.alpha", KeyType::Double, "1", false, {}, "dissipation exponent in (0, 2]"},
      {"td.dt", KeyType::Double, "0.001", false, {}, "time step"},
      {"td.t_end", KeyType::Double, "1", false, {}, "final time"},
      {"td.cfl_safety", KeyType::Double, "0.5", false, {}, "CFL safety factor in (0, 1]"},
      {"td.dissipation", KeyType::Bool, "true", false, {}, "false drops the |D|^alpha term"},
      {"td.initial", KeyType::Enum, "sine", false, {"sine", "random"}, "initial data preset"},
      {"td.random_slope", KeyType::Double, "-2", false, {}, "spectral slope of random presets"},
      {"td.velocity", KeyType::Enum, "zero", false, {"zero", "shear", "cellular", "random"}, "velocity preset"},
      {"td.velocity_amplitude", KeyType::Double, "1", false, {}, "velocity scale"},
      {"td.forcing", KeyType::Enum, "zero", false, {"zero", "steady", "oscillating"}, "forcing preset"},
      {"td.forcing_amplitude", KeyType::Double, "1", false, {}, "forcing scale"},
      {"td.norm_p", KeyType::DoubleList, "2,4,inf", false, {}, "L^p norms recorded"},
      {"td.block_p", KeyType::DoubleList, "4", false, {}, "block-norm exponents recorded"},
      {"td.stride", KeyType::Int, "1", false, {}, "record every k-th step"},
      {"td.reports", KeyType::StringList, "max_principle,smoothing,log_estimate,besov_propagation", false,
       {"max_principle", "smoothing", "log_estimate", "besov_propagation"}, "reports to generate"},
      {"td.besov_s", KeyType::Double, "0.5", false, {}, "regularity of the propagation report"},
      {"td.besov_r", KeyType::Double, "2", false, {}, "summability of the propagation report"},

      {"verify.estimates", KeyType::StringList,
       "riesz_commutator,riesz_commutator_besov,block_commutator,conv_commutator,gen_bernstein,bernstein", false,
       {"riesz_commutator", "riesz_commutator_besov", "block_commutator", "conv_commutator", "gen_bernstein",
        "bernstein"},
       "estimates to sample"},
      {"verify.samples", KeyType::Int, "100", false, {}, "ensemble size per estimate"},
      {"verify.slope", KeyType::Double, "-2", false, {}, "spectral slope of random data"},
      {"verify.p", KeyType::Double, "4", false, {}, "Lebesgue exponent"},
      {"verify.r", KeyType::Double, "2", false, {}, "Besov summability"},
      {"verify.rho", KeyType::Double, "2", false, {}, "second exponent of the Besov-type commutator bound"},
      {"verify.epsilon", KeyType::Double, "0.5", false, {}, "regularity margin of the Besov-type commutator bound"},
      {"verify.compare_n", KeyType::Int, "0", false, {}, "second resolution for the drift check (0: none)"},

      {"analyze.snapshot", KeyType::String, "", false, {}, "BLAB1 file to analyse (required for analyze)"},
      {"analyze.field", KeyType::Enum, "theta", false, {"theta", "omega", "gamma"}, "field to decompose"},
      {"analyze.p", KeyType::Double, "4", false, {}, "Lebesgue exponent of block norms"},
      {"analyze.s", KeyType::Double, "0", false, {}, "weight exponent 2^{qs}"},
  };
  return schema;
}

inline const KeySpec* find_key(std::string_view name) {
  for (const auto& k : config_schema()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

/// Validated flat configuration; every schema key has a value.
class RunConfig {
 public:
  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::out_of_range("config key not in schema: " + key);
    return it->second;
  }

  std::string str(const std::string& key) const { return raw(key); }
  long long integer(const std::string& key) const {
    long long v = 0;
    detail::parse_int(raw(key), v);
    return v;
  }
  std::uint64_t uinteger(const std::string& key) const {
    std::uint64_t v = 0;
    const auto& s = raw(key);
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
  }
  double number(const std::string& key) const {
    double v = 0;
    detail::parse_double(raw(key), v);
    return v;
  }
  bool flag(const std::string& key) const { return raw(key) == "true"; }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : detail::split_list(raw(key))) {
      double v = 0;
      detail::parse_double(s, v);
      out.push_back(v);
    }
    return out;
  }
  std::vector<std::string> names(const std::string& key) const { return detail::split_list(raw(key)); }

  std::string subcommand() const { return raw("subcommand"); }

  /// Assign one value with full type checking; `line` is used in error messages.
  void set(std::string_view key, std::string_view value, int line) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(line, "unknown key '" + std::string(key) + "'");
    values_[spec->name] = validate(*spec, value, line);
    explicit_.insert_or_assign(spec->name, line);
  }

  bool given(const std::string& key) const { return explicit_.count(key) != 0; }

  /// Fill defaults and check required and cross-key constraints.
  void finalize() {
    for (const auto& k : config_schema()) {
      if (values_.count(k.name)) continue;
      if (k.required) throw ConfigError(0, "missing required key '" + k.name + "'");
      values_[k.name] = k.default_value;
    }
    if (subcommand() == "analyze" && raw("analyze.snapshot").empty()) {
      throw ConfigError(0, "missing required key 'analyze.snapshot' for subcommand analyze");
    }
    if (subcommand() == "simulate" && raw("sim.initial") == "snapshot" && raw("sim.snapshot_in").empty()) {
      throw ConfigError(line_of("sim.initial"), "sim.initial = snapshot needs sim.snapshot_in");
    }
  }

  /// Resolved configuration in the input syntax; parsing it reproduces this config.
  std::string echo() const {
    std::ostringstream os;
    os << "# resolved configuration\n";
    for (const auto& k : config_schema()) os << k.name << " = " << raw(k.name) << "\n";
    return os.str();
  }

 private:
  int line_of(const std::string& key) const {
    auto it = explicit_.find(key);
    return it == explicit_.end() ? 0 : it->second;
  }

  static std::string validate(const KeySpec& spec, std::string_view value, int line) {
    const std::string v(value);
    auto mismatch = [&]() {
      return ConfigError(line, "type mismatch for '" + spec.name + "': expected " + detail::type_name(spec.type) +
                                   ", got '" + v + "'");
    };
    switch (spec.type) {
      case KeyType::Int: {
        long long x = 0;
        if (!detail::parse_int(v, x)) throw mismatch();
        if (spec.name == "grid.n") {
          if (x < 8 || (x & (x - 1)) != 0) throw ConfigError(line, "n must be a power of two (>= 8), got " + v);
        } else if (x < 0) {
          throw ConfigError(line, "'" + spec.name + "' must be non-negative");
        }
        break;
      }
      case KeyType::UInt: {
        std::uint64_t x = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw mismatch();
        break;
      }
      case KeyType::Double: {
        double x = 0;
        if (!detail::parse_double(v, x)) throw mismatch();
        break;
      }
      case KeyType::Bool:
        if (v != "true" && v != "false") throw mismatch();
        break;
      case KeyType::String:
        break;
      case KeyType::Enum:
        if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
          std::string all;
          for (const auto& c : spec.choices) all += (all.empty() ? "" : "|") + c;
          throw ConfigError(line, "invalid value '" + v + "' for '" + spec.name + "' (expected " + all + ")");
        }
        break;
      case KeyType::DoubleList:
        for (const auto& s : detail::split_list(v)) {
          double x = 0;
          if (!detail::parse_double(s, x)) throw mismatch();
        }
        break;
      case KeyType::StringList:
        for (const auto& s : detail::split_list(v)) {
          if (std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
            throw ConfigError(line, "unknown entry '" + s + "' in '" + spec.name + "'");
          }
        }
        break;
    }
    return v;
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, int> explicit_;
};

namespace detail {
inline void parse_lines(RunConfig& cfg, std::string_view text) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    ++line_no;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    cfg.set(key, trim(line.substr(eq + 1)), line_no);
  }
}
}  // namespace detail

/// Parse `key = value` lines with `#` comments, applying `overrides` ("key=value") afterwards.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
  RunConfig cfg;
  detail::parse_lines(cfg, text);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(-1, "expected key=value, got '" + o + "'");
    cfg.set(detail::trim(std::string_view(o).substr(0, eq)), detail::trim(std::string_view(o).substr(eq + 1)), -1);
  }
  cfg.finalize();
  return cfg;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace blab::io
