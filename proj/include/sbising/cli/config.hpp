#pragma once

// Experiment configuration: an INI file (sections, `key = value`, `;` comments)
// checked against a typed, versioned schema. Every key has a declared type
// (integer, real, text, real list, integer list); unknown keys, missing
// required keys and malformed numbers are ConfigErrors naming the field.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "../errors.hpp"
#include "../fock.hpp"
#include "../kernel.hpp"

namespace sbising::cli {

inline constexpr std::int64_t kSchemaVersion = 1;

enum class ExperimentKind {
  Correlation,
  RhoRatio,
  RhoSeries,
  Susceptibility,
  PercolationTwoPoint,
  LroScan,
  AppendixConvergence,
  FockValidate,
  FkIdentity,
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::Correlation, "correlation"},
      {ExperimentKind::RhoRatio, "rho_ratio"},
      {ExperimentKind::RhoSeries, "rho_series"},
      {ExperimentKind::Susceptibility, "susceptibility"},
      {ExperimentKind::PercolationTwoPoint, "percolation_two_point"},
      {ExperimentKind::LroScan, "lro_scan"},
      {ExperimentKind::AppendixConvergence, "appendix_convergence"},
      {ExperimentKind::FockValidate, "fock_validate"},
      {ExperimentKind::FkIdentity, "fk_identity"},
  };
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

inline std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kind_names())
    if (name == s) return kind;
  return std::nullopt;
}

enum class FieldType { Integer, Real, Text, RealList, IntegerList };

inline const char* to_string(FieldType t) {
  switch (t) {
    case FieldType::Integer: return "integer";
    case FieldType::Real: return "real";
    case FieldType::Text: return "text";
    case FieldType::RealList: return "list of reals";
    default: return "list of integers";
  }
}

using Value = std::variant<std::int64_t, double, std::string, std::vector<double>, std::vector<std::int64_t>>;

struct FieldSpec {
  std::string key;  ///< "section.name"
  FieldType type;
  bool required = false;
  std::optional<Value> fallback{};
};

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

inline std::int64_t parse_integer(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

inline double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a finite real number, got '" + text + "'");
  return v;
}

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline Value parse_value(const FieldSpec& spec, const std::string& raw) {
  const std::string text = trim(raw);
  switch (spec.type) {
    case FieldType::Integer: return parse_integer(spec.key, text);
    case FieldType::Real: return parse_real(spec.key, text);
    case FieldType::Text:
      if (text.empty()) throw ConfigError(spec.key, "must not be empty");
      return text;
    case FieldType::RealList: {
      std::vector<double> v;
      for (const auto& item : split_list(text)) v.push_back(parse_real(spec.key, item));
      if (v.empty()) throw ConfigError(spec.key, "expected a comma-separated list of reals");
      return v;
    }
    default: {
      std::vector<std::int64_t> v;
      for (const auto& item : split_list(text)) v.push_back(parse_integer(spec.key, item));
      if (v.empty()) throw ConfigError(spec.key, "expected a comma-separated list of integers");
      return v;
    }
  }
}

inline std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<X, double>) {
          return format_real(x);
        } else if constexpr (std::is_same_v<X, std::string>) {
          return x;
        } else {
          std::string out;
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ", ";
            if constexpr (std::is_same_v<X, std::vector<double>>) out += format_real(x[i]);
            else out += std::to_string(x[i]);
          }
          return out;
        }
      },
      v);
}

inline void add_chain(std::vector<FieldSpec>& s, const std::string& section, std::int64_t sweeps,
                      std::int64_t burn_in) {
  s.push_back({section + ".n_sweeps", FieldType::Integer, false, Value{sweeps}});
  s.push_back({section + ".burn_in", FieldType::Integer, false, Value{burn_in}});
  s.push_back({section + ".chains", FieldType::Integer, false, Value{std::int64_t{1}}});
}

inline void add_coupling(std::vector<FieldSpec>& s, const std::string& section) {
  s.push_back({section + ".alpha", FieldType::Real});
  s.push_back({section + ".lambda", FieldType::Real});
}

}  // namespace detail

/// Schema for one experiment kind: common fields plus the kind's blocks.
inline std::vector<FieldSpec> schema_for(ExperimentKind kind) {
  using detail::add_chain;
  using detail::add_coupling;
  std::vector<FieldSpec> s{
      {"experiment.schema", FieldType::Integer, true},
      {"experiment.kind", FieldType::Text, true},
      {"experiment.seed", FieldType::Integer, true},
      {"experiment.output", FieldType::Text, false, Value{std::string("out")}},
      {"experiment.workers", FieldType::Integer, false, Value{std::int64_t{1}}},
  };
  if (kind != ExperimentKind::FockValidate) {
    s.push_back({"kernel.type", FieldType::Text, true});
    s.push_back({"kernel.modes", FieldType::Text});
    s.push_back({"kernel.amplitude", FieldType::Real});
    s.push_back({"kernel.dimension", FieldType::Integer});
    s.push_back({"kernel.exponent", FieldType::Real});
    s.push_back({"kernel.cutoff", FieldType::Real});
  }
  switch (kind) {
    case ExperimentKind::Correlation:
      add_coupling(s, "ising");
      s.push_back({"ising.T", FieldType::Real, true});
      s.push_back({"ising.times", FieldType::RealList, true});
      add_chain(s, "ising", 20000, 2000);
      break;
    case ExperimentKind::Susceptibility:
      add_coupling(s, "ising");
      s.push_back({"ising.T", FieldType::Real, true});
      add_chain(s, "ising", 20000, 2000);
      break;
    case ExperimentKind::RhoRatio:
      add_coupling(s, "ratio");
      s.push_back({"ratio.horizons", FieldType::RealList, true});
      add_chain(s, "ratio", 20000, 2000);
      break;
    case ExperimentKind::RhoSeries:
      add_coupling(s, "series");
      s.push_back({"series.n_max", FieldType::Integer, false, Value{std::int64_t{2}}});
      s.push_back({"series.horizon", FieldType::Real, false, Value{0.0}});
      s.push_back({"series.points_per_sweep", FieldType::Integer, false, Value{std::int64_t{16}}});
      add_chain(s, "series", 20000, 2000);
      break;
    case ExperimentKind::PercolationTwoPoint:
      s.push_back({"percolation.alpha_list", FieldType::RealList, true});
      s.push_back({"percolation.n", FieldType::Integer, true});
      s.push_back({"percolation.T", FieldType::Real});
      s.push_back({"percolation.samples", FieldType::Integer, false, Value{std::int64_t{20000}}});
      s.push_back({"percolation.p0_samples", FieldType::Integer, false, Value{std::int64_t{100000}}});
      break;
    case ExperimentKind::AppendixConvergence:
      s.push_back({"percolation.alpha", FieldType::Real, true});
      s.push_back({"percolation.T", FieldType::Integer, true});
      s.push_back({"percolation.n", FieldType::Integer, true});
      s.push_back({"percolation.N_list", FieldType::IntegerList, true});
      s.push_back({"percolation.samples", FieldType::Integer, false, Value{std::int64_t{20000}}});
      break;
    case ExperimentKind::LroScan:
      s.push_back({"lro.alpha_list", FieldType::RealList, true});
      s.push_back({"lro.times", FieldType::RealList, true});
      s.push_back({"lro.T", FieldType::Real, true});
      s.push_back({"lro.samples", FieldType::Integer, false, Value{std::int64_t{20000}}});
      s.push_back({"lro.series", FieldType::Integer, false, Value{std::int64_t{1}}});
      s.push_back({"lro.series_sweeps", FieldType::Integer, false, Value{std::int64_t{4000}}});
      add_chain(s, "lro", 20000, 2000);
      break;
    case ExperimentKind::FockValidate:
      s.push_back({"fock.modes", FieldType::Text, true});
      s.push_back({"fock.n_max", FieldType::IntegerList, true});
      s.push_back({"fock.lambda", FieldType::RealList, true});
      s.push_back({"fock.T", FieldType::Real});
      break;
    case ExperimentKind::FkIdentity:
      s.push_back({"lattice.alpha_list", FieldType::RealList, true});
      s.push_back({"lattice.T", FieldType::Real, true});
      s.push_back({"lattice.N", FieldType::Integer, true});
      break;
  }
  return s;
}

/// "a:b, c:d" into pairs of reals.
inline std::vector<std::pair<double, double>> parse_pairs(const std::string& key, const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : detail::split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key, "expected entries of the form a:b, got '" + item + "'");
    out.emplace_back(detail::parse_real(key, detail::trim(item.substr(0, colon))),
                     detail::parse_real(key, detail::trim(item.substr(colon + 1))));
  }
  if (out.empty()) throw ConfigError(key, "expected at least one a:b entry");
  return out;
}

class Config {
 public:
  static Config parse(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    std::map<std::string, std::string> raw;
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError(section, "keys must live inside a [section]");
      for (const auto& [key, value] : body) raw[section + "." + key] = value.data();
    }
    return from_raw(raw);
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    return parse(in);
  }

  ExperimentKind kind() const { return kind_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, Value>& values() const noexcept { return values_; }

  std::int64_t integer(const std::string& key) const { return get<std::int64_t>(key); }
  double real(const std::string& key) const { return get<double>(key); }
  const std::string& text(const std::string& key) const { return get<std::string>(key); }
  const std::vector<double>& reals(const std::string& key) const { return get<std::vector<double>>(key); }
  const std::vector<std::int64_t>& integers(const std::string& key) const {
    return get<std::vector<std::int64_t>>(key);
  }

  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("experiment.seed")); }
  std::string output() const { return text("experiment.output"); }
  std::size_t workers() const { return static_cast<std::size_t>(integer("experiment.workers")); }

  /// α from either `<section>.alpha` or `<section>.lambda` (α = λ²/8).
  double alpha(const std::string& section) const {
    if (has(section + ".alpha")) return real(section + ".alpha");
    const double l = real(section + ".lambda");
    return l * l / 8.0;
  }
  double lambda(const std::string& section) const {
    if (has(section + ".lambda")) return real(section + ".lambda");
    return std::sqrt(8.0 * real(section + ".alpha"));
  }

  /// The interaction kernel described by the [kernel] block.
  Kernel kernel() const {
    const std::string& type = text("kernel.type");
    if (type == "modes") {
      std::vector<Mode> modes;
      for (const auto& [w, f] : parse_pairs("kernel.modes", text("kernel.modes"))) modes.push_back({w, f});
      return wrap("kernel.modes", [&] { return Kernel::modes(modes); });
    }
    if (type == "poly") return wrap("kernel.amplitude", [&] { return Kernel::poly(real("kernel.amplitude")); });
    return wrap("kernel.exponent", [&] {
      return Kernel::power_law(static_cast<int>(integer("kernel.dimension")), real("kernel.exponent"),
                               real("kernel.cutoff"));
    });
  }

  /// Modes of the [fock] block as (ω, v) pairs.
  std::vector<FockMode> fock_modes() const {
    std::vector<FockMode> modes;
    for (const auto& [omega, v] : parse_pairs("fock.modes", text("fock.modes"))) modes.push_back({omega, v});
    return modes;
  }

  /// INI text that parses back to the same settings (defaults made explicit).
  std::string serialize() const {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    for (const auto& [key, value] : values_) {
      const auto dot = key.find('.');
      sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), detail::format_value(value));
    }
    std::ostringstream out;
    // [experiment] first so that the file reads top-down.
    auto emit = [&](const std::string& name) {
      out << "[" << name << "]\n";
      for (const auto& [k, v] : sections[name]) out << k << " = " << v << "\n";
      out << "\n";
    };
    emit("experiment");
    for (const auto& [name, body] : sections)
      if (name != "experiment") emit(name);
    return out.str();
  }

  friend bool operator==(const Config& a, const Config& b) { return a.kind_ == b.kind_ && a.values_ == b.values_; }

 private:
  template <class T>
  const T& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "missing");
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError(key, "has an unexpected type");
    return *v;
  }

  template <class F>
  static Kernel wrap(const std::string& key, F&& make) {
    try {
      return make();
    } catch (const ValidationError& e) {
      throw ConfigError(key, e.what());
    }
  }

  static Config from_raw(const std::map<std::string, std::string>& raw) {
    const auto kind_it = raw.find("experiment.kind");
    if (kind_it == raw.end()) throw ConfigError("experiment.kind", "missing");
    const auto kind = parse_kind(detail::trim(kind_it->second));
    if (!kind) {
      std::string known;
      for (const auto& [k, name] : kind_names()) known += (known.empty() ? "" : ", ") + name;
      throw ConfigError("experiment.kind", "unknown kind '" + kind_it->second + "' (expected one of " + known + ")");
    }
    Config c;
    c.kind_ = *kind;
    const auto schema = schema_for(*kind);
    for (const auto& [key, text] : raw) {
      const auto spec = std::find_if(schema.begin(), schema.end(), [&](const FieldSpec& f) { return f.key == key; });
      if (spec == schema.end()) throw ConfigError(key, "unknown key for experiment kind " + to_string(*kind));
      c.values_[key] = detail::parse_value(*spec, text);
    }
    for (const auto& spec : schema) {
      if (c.values_.count(spec.key)) continue;
      if (spec.required) throw ConfigError(spec.key, std::string("required ") + to_string(spec.type) + " is missing");
      if (spec.fallback) c.values_[spec.key] = *spec.fallback;
    }
    c.validate();
    return c;
  }

  void validate() const {
    if (integer("experiment.schema") != kSchemaVersion)
      throw ConfigError("experiment.schema", "unsupported schema version (expected " +
                                                 std::to_string(kSchemaVersion) + ")");
    if (integer("experiment.seed") < 0) throw ConfigError("experiment.seed", "must be nonnegative");
    if (integer("experiment.workers") < 1) throw ConfigError("experiment.workers", "must be at least 1");

    for (const char* section : {"ising", "ratio", "series"}) {
      const std::string s = section;
      const bool a = has(s + ".alpha"), l = has(s + ".lambda");
      if (a && l)
        throw ConfigError(s + ".alpha/" + s + ".lambda",
                          "both alpha and lambda are set; they are redundant (alpha = lambda^2/8), give only one");
      const bool needs = (s == "ising" && (kind_ == ExperimentKind::Correlation ||
                                           kind_ == ExperimentKind::Susceptibility)) ||
                         (s == "ratio" && kind_ == ExperimentKind::RhoRatio) ||
                         (s == "series" && kind_ == ExperimentKind::RhoSeries);
      if (needs && !a && !l) throw ConfigError(s + ".alpha", "one of alpha or lambda is required");
      if (a && real(s + ".alpha") < 0.0) throw ConfigError(s + ".alpha", "must be nonnegative");
    }
    for (const auto& [key, value] : values_) {
      const auto name = key.substr(key.find('.') + 1);
      if ((name == "n_sweeps" || name == "chains" || name == "samples" || name == "p0_samples" ||
           name == "series_sweeps" || name == "points_per_sweep") &&
          std::get<std::int64_t>(value) < 1)
        throw ConfigError(key, "must be at least 1");
      if (name == "burn_in" && std::get<std::int64_t>(value) < 0) throw ConfigError(key, "must be nonnegative");
    }
    for (const char* section : {"ising", "ratio", "series", "lro"}) {
      const std::string s = section;
      if (has(s + ".burn_in") && integer(s + ".burn_in") >= integer(s + ".n_sweeps"))
        throw ConfigError(s + ".burn_in", "must be smaller than n_sweeps");
    }
    if (kind_ != ExperimentKind::FockValidate) {
      const std::string& type = text("kernel.type");
      auto require = [&](const char* key) {
        if (!has(key)) throw ConfigError(key, "required for kernel.type = " + type);
      };
      if (type == "modes") require("kernel.modes");
      else if (type == "poly") require("kernel.amplitude");
      else if (type == "powerlaw") {
        require("kernel.dimension");
        require("kernel.exponent");
        require("kernel.cutoff");
      } else {
        throw ConfigError("kernel.type", "unknown kernel '" + type + "' (expected modes, poly or powerlaw)");
      }
      (void)kernel();  // surfaces invalid kernel parameters as config errors
    } else {
      (void)fock_modes();
    }
  }

  ExperimentKind kind_ = ExperimentKind::Correlation;
  std::map<std::string, Value> values_;
};

}  // namespace sbising::cli
