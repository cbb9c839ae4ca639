#pragma once

// Runs one configured experiment and writes its artifacts:
//   <output>/<kind>.csv     one observable per row, fixed columns
//   <output>/summary.json   kind-specific summary
//   <output>/config.ini     the resolved configuration (defaults explicit)
//   <output>/manifest.json  config hash, tool version, timestamps, checksums
// The data files depend only on the config; timestamps live in the manifest.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../continuum_ising.hpp"
#include "../discrete_ising.hpp"
#include "../fock.hpp"
#include "../overlap_series.hpp"
#include "../percolation.hpp"
#include "../version.hpp"
#include "config.hpp"

namespace sbising::cli {

using json = nlohmann::ordered_json;

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"experiment", "kernel_id", "alpha", "lambda", "T",        "N",  "t",
                                             "mean",       "stderr",    "n",     "tau_int", "seed", "observable"};
  return cols;
}

struct CsvRow {
  std::string experiment;
  std::string kernel_id;
  std::optional<double> alpha, lambda, T;
  std::optional<std::int64_t> N;
  std::optional<double> t;
  double mean = 0.0;
  std::optional<double> std_error;
  std::optional<std::uint64_t> n;
  std::optional<double> tau_int;
  std::uint64_t seed = 0;
  std::string observable;

  CsvRow& with(const Estimate& e) {
    mean = e.mean;
    std_error = e.std_error;
    n = e.n_samples;
    tau_int = e.autocorrelation_time;
    seed = e.seed;
    return *this;
  }
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) return fmt(*v);
  else return std::to_string(*v);
}

inline json estimate_json(const Estimate& e) {
  return json{{"mean", e.mean},
              {"stderr", e.std_error},
              {"n", e.n_samples},
              {"tau_int", e.autocorrelation_time},
              {"high_variance", e.high_variance}};
}

}  // namespace detail

inline std::string to_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  using detail::opt;
  for (const auto& r : rows) {
    out << r.experiment << "," << r.kernel_id << "," << opt(r.alpha) << "," << opt(r.lambda) << "," << opt(r.T)
        << "," << opt(r.N) << "," << opt(r.t) << "," << detail::fmt(r.mean) << "," << opt(r.std_error) << ","
        << opt(r.n) << "," << opt(r.tau_int) << "," << r.seed << "," << r.observable << "\n";
  }
  return out.str();
}

struct ExperimentResult {
  std::vector<CsvRow> rows;
  json summary;
};

inline ChainRun chain_run(const Config& c, const std::string& section, std::uint64_t seed, std::size_t workers) {
  ChainRun r;
  r.n_sweeps = static_cast<std::uint64_t>(c.integer(section + ".n_sweeps"));
  r.burn_in = static_cast<std::uint64_t>(c.integer(section + ".burn_in"));
  r.chains = static_cast<std::size_t>(c.integer(section + ".chains"));
  r.seed = seed;
  r.workers = workers;
  return r;
}

namespace detail {

inline ExperimentResult run_correlation(const Config& c, std::size_t workers) {
  const Kernel kernel = c.kernel();
  const double alpha = c.alpha("ising"), T = c.real("ising.T");
  const auto& times = c.reals("ising.times");
  std::vector<std::vector<double>> sets;
  for (double t : times) sets.push_back({t});
  const auto est = estimate_correlations(IsingParams{alpha, T, kernel, false}, sets,
                                         chain_run(c, "ising", c.seed(), workers));
  ExperimentResult res;
  res.summary = {{"kind", "correlation"}, {"alpha", alpha}, {"T", T}, {"kernel", kernel.id()}};
  for (std::size_t i = 0; i < times.size(); ++i) {
    CsvRow row{"correlation", kernel.id(), alpha, std::sqrt(8.0 * alpha), T, std::nullopt, times[i]};
    row.with(est[i]).observable = "tau";
    res.rows.push_back(row);
    json e = estimate_json(est[i]);
    e["t"] = times[i];
    res.summary["tau"].push_back(e);
  }
  return res;
}

inline ExperimentResult run_susceptibility(const Config& c, std::size_t workers) {
  const Kernel kernel = c.kernel();
  const double alpha = c.alpha("ising"), T = c.real("ising.T");
  const Estimate e = estimate_susceptibility(IsingParams{alpha, T, kernel, false}, chain_run(c, "ising", c.seed(), workers));
  ExperimentResult res;
  CsvRow row{"susceptibility", kernel.id(), alpha, std::sqrt(8.0 * alpha), T};
  row.with(e).observable = "chi";
  res.rows.push_back(row);
  res.summary = {{"kind", "susceptibility"}, {"alpha", alpha}, {"T", T}, {"kernel", kernel.id()},
                 {"chi", estimate_json(e)}};
  return res;
}

inline ExperimentResult run_rho_ratio(const Config& c, std::size_t workers) {
  const Kernel kernel = c.kernel();
  const double lambda = c.lambda("ratio"), alpha = c.alpha("ratio");
  const auto report = estimate_rho_ratio(lambda, kernel, c.reals("ratio.horizons"),
                                         chain_run(c, "ratio", c.seed(), workers));
  ExperimentResult res;
  const double bound = overlap_upper_bound(lambda, kernel);
  res.summary = {{"kind", "rho_ratio"}, {"alpha", alpha}, {"lambda", lambda}, {"kernel", kernel.id()},
                 {"overlap_upper_bound", bound}, {"plateau", estimate_json(report.plateau)},
                 {"plateau_detected", report.plateau_start.has_value()}};
  if (report.plateau_start) res.summary["plateau_start_T"] = report.horizons[*report.plateau_start];
  for (std::size_t i = 0; i < report.horizons.size(); ++i) {
    CsvRow row{"rho_ratio", kernel.id(), alpha, lambda, report.horizons[i]};
    row.with(report.values[i]).observable = "rho_ratio";
    res.rows.push_back(row);
  }
  CsvRow b{"rho_ratio", kernel.id(), alpha, lambda};
  b.mean = bound;
  b.seed = c.seed();
  b.observable = "overlap_upper_bound";
  res.rows.push_back(b);
  return res;
}

inline ExperimentResult run_rho_series(const Config& c, std::size_t workers) {
  const Kernel kernel = c.kernel();
  const double lambda = c.lambda("series"), alpha = c.alpha("series");
  SeriesSettings s;
  s.n_max = static_cast<int>(c.integer("series.n_max"));
  s.horizon = c.real("series.horizon");
  s.points_per_sweep = static_cast<std::size_t>(c.integer("series.points_per_sweep"));
  const auto r = estimate_rho_series(lambda, kernel, s, chain_run(c, "series", c.seed(), workers));
  ExperimentResult res;
  const std::string id = kernel.id();
  auto add = [&](const Estimate& e, std::string obs, std::optional<std::int64_t> order = {},
                 std::optional<double> t = {}) {
    CsvRow row{"rho_series", id, alpha, lambda, r.horizon, order, t};
    row.with(e).observable = std::move(obs);
    res.rows.push_back(row);
  };
  add(r.partial_sum, "partial_sum", s.n_max);
  add(r.overlap_bound, "rho_upper_estimate", s.n_max);
  for (std::size_t n = 0; n < r.terms.size(); ++n) {
    add(r.terms[n], "term", static_cast<std::int64_t>(n + 1));
    add(r.normalized_terms[n], "bare_integral", static_cast<std::int64_t>(n + 1));
  }
  for (std::size_t p = 0; p < 3; ++p)
    add(r.first_term_by_horizon[p], "first_term_upto", 1, r.first_term_horizons[p]);
  res.summary = {{"kind", "rho_series"},
                 {"alpha", alpha},
                 {"lambda", lambda},
                 {"kernel", id},
                 {"horizon", r.horizon},
                 {"n_max", s.n_max},
                 {"partial_sum", estimate_json(r.partial_sum)},
                 {"rho_upper_estimate", estimate_json(r.overlap_bound)},
                 {"overlap_upper_bound", overlap_upper_bound(lambda, kernel)},
                 {"first_term_label", to_string(r.first_term_label)},
                 {"horizon_warning", r.horizon_warning}};
  return res;
}

inline ExperimentResult run_percolation_two_point(const Config& c) {
  const Kernel kernel = c.kernel();
  const auto n = c.integer("percolation.n");
  if (n < 1) throw ConfigError("percolation.n", "must be at least 1");
  const std::int64_t L = default_truncation(0, n);
  const double T = c.has("percolation.T") ? c.real("percolation.T") : static_cast<double>(L + 1);
  if (T < static_cast<double>(n)) throw ConfigError("percolation.T", "must be at least n");
  const auto samples = static_cast<std::uint64_t>(c.integer("percolation.samples"));
  const auto p0_samples = static_cast<std::uint64_t>(c.integer("percolation.p0_samples"));
  const auto& alphas = c.reals("percolation.alpha_list");
  const auto p0 = estimate_p0(alphas, kernel, p0_samples, split_seed(c.seed(), 0));
  ExperimentResult res;
  res.summary = {{"kind", "percolation_two_point"}, {"kernel", kernel.id()}, {"T", T}, {"truncation_L", L}};
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double a = alphas[i];
    CsvRow p{"percolation_two_point", kernel.id(), a, std::nullopt, T};
    p.with(p0[i]).observable = "p0";
    res.rows.push_back(p);
    SiteBondModel model(SiteDomain::Natural, L, a, kernel, p0[i].mean);
    json entry{{"alpha", a}, {"p0", detail::estimate_json(p0[i])}};
    for (std::int64_t k = 1; k <= n; ++k) {
      const auto cont = continuum_two_point(a, T, kernel, 0.0, static_cast<double>(k), samples,
                                            split_seed(c.seed(), 1 + 2 * (i * 1000 + static_cast<std::size_t>(k))));
      const auto disc = discrete_two_point(model, 0, k, samples,
                                           split_seed(c.seed(), 2 + 2 * (i * 1000 + static_cast<std::size_t>(k))));
      CsvRow rc{"percolation_two_point", kernel.id(), a, std::nullopt, T, std::nullopt, static_cast<double>(k)};
      rc.with(cont).observable = "continuum";
      CsvRow rd = rc;
      rd.N = L;
      rd.with(disc).observable = "discrete_one_sided";
      res.rows.push_back(rc);
      res.rows.push_back(rd);
      entry["continuum"].push_back(detail::estimate_json(cont));
      entry["discrete_one_sided"].push_back(detail::estimate_json(disc));
    }
    res.summary["alphas"].push_back(entry);
  }
  return res;
}

inline ExperimentResult run_appendix(const Config& c) {
  const Kernel kernel = c.kernel();
  const double alpha = c.real("percolation.alpha");
  const auto T = c.integer("percolation.T"), n = c.integer("percolation.n");
  std::vector<std::size_t> grids;
  for (auto g : c.integers("percolation.N_list")) {
    if (g < 3) throw ConfigError("percolation.N_list", "grid sizes must be at least 3");
    grids.push_back(static_cast<std::size_t>(g));
  }
  if (T < 1 || n < 0 || n > T) throw ConfigError("percolation.n", "need 0 <= n <= T with T >= 1");
  if (T > 1000000) throw ConfigError("percolation.T", "too large");
  const auto rows = appendix_convergence_experiment(alpha, static_cast<int>(T), kernel, static_cast<int>(n), grids,
                                                    static_cast<std::uint64_t>(c.integer("percolation.samples")),
                                                    c.seed());
  ExperimentResult res;
  res.summary = {{"kind", "appendix_convergence"}, {"alpha", alpha}, {"T", T}, {"n", n}, {"kernel", kernel.id()}};
  for (const auto& r : rows) {
    CsvRow d{"appendix_convergence", kernel.id(), alpha, std::nullopt, static_cast<double>(T),
             static_cast<std::int64_t>(r.grid), static_cast<double>(n)};
    d.with(r.discrete).observable = "discrete_bond";
    CsvRow k = d;
    k.with(r.continuum).observable = "continuum";
    CsvRow g = d;
    g.mean = r.gap;
    g.std_error = r.gap_stderr;
    g.tau_int.reset();
    g.observable = "gap";
    res.rows.insert(res.rows.end(), {d, k, g});
    json e{{"N", r.grid}, {"discrete", detail::estimate_json(r.discrete)}, {"gap", r.gap}, {"gap_stderr", r.gap_stderr}};
    if (alpha == 0.0) {
      CsvRow f = g;
      f.mean = r.closed_form_gap;
      f.std_error = 0.0;
      f.observable = "closed_form_gap";
      res.rows.push_back(f);
      e["closed_form_gap"] = r.closed_form_gap;
    }
    res.summary["rows"].push_back(e);
  }
  if (!rows.empty()) res.summary["continuum"] = detail::estimate_json(rows.front().continuum);
  return res;
}

inline ExperimentResult run_lro(const Config& c, std::size_t workers) {
  const Kernel kernel = c.kernel();
  LroSettings s;
  s.alphas = c.reals("lro.alpha_list");
  s.times = c.reals("lro.times");
  s.horizon = c.real("lro.T");
  s.run = chain_run(c, "lro", 0, workers);
  s.percolation_samples = static_cast<std::uint64_t>(c.integer("lro.samples"));
  s.with_series = c.integer("lro.series") != 0;
  const auto sweeps = static_cast<std::uint64_t>(c.integer("lro.series_sweeps"));
  if (sweeps < 40) throw ConfigError("lro.series_sweeps", "must be at least 40");
  s.series_run = ChainRun{sweeps, sweeps / 10, 0, 1, workers};
  const auto report = long_range_order_scan(kernel, s, c.seed());
  ExperimentResult res;
  res.summary = {{"kind", "lro_scan"},
                 {"kernel", kernel.id()},
                 {"T", s.horizon},
                 {"threshold", kOrderThreshold},
                 {"classifier_note", "DECAY/PLATEAU threshold and 2-stderr flatness test are tool conventions"},
                 {"plateau_monotone", report.plateau_monotone}};
  res.summary["crossover_window"] = {std::isnan(report.crossover_low) ? json() : json(report.crossover_low),
                                     std::isnan(report.crossover_high) ? json() : json(report.crossover_high)};
  for (const auto& row : report.rows) {
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      CsvRow r{"lro_scan", kernel.id(), row.alpha, std::sqrt(8.0 * row.alpha), s.horizon, std::nullopt, s.times[k]};
      r.with(row.correlation[k]).observable = "tau";
      CsvRow p = r;
      p.with(row.percolation[k]).observable = "continuum_two_point";
      res.rows.push_back(r);
      res.rows.push_back(p);
    }
    json e{{"alpha", row.alpha},
           {"classification", to_string(row.label)},
           {"plateau_level", row.plateau.mean},
           {"stderr", row.plateau.std_error}};
    if (s.with_series) {
      e["series_first_term_label"] = to_string(row.series_label);
      CsvRow r{"lro_scan", kernel.id(), row.alpha, std::sqrt(8.0 * row.alpha), s.horizon, 1};
      r.with(row.series_first_term).observable = "series_bare_first_term";
      res.rows.push_back(r);
    }
    res.summary["alphas"].push_back(e);
  }
  return res;
}

inline ExperimentResult run_fock(const Config& c) {
  TruncatedModel model;
  model.modes = c.fock_modes();
  std::vector<int> cutoffs;
  for (auto n : c.integers("fock.n_max")) cutoffs.push_back(static_cast<int>(n));
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1]) throw ConfigError("fock.n_max", "cutoffs must increase");
  const std::string id = model.kernel().id();
  ExperimentResult res;
  res.summary = {{"kind", "fock_validate"}, {"kernel", id}};
  for (double lambda : c.reals("fock.lambda")) {
    model.lambda = lambda;
    const auto report = cutoff_convergence(model, cutoffs);
    json e{{"lambda", lambda},
           {"truncation_error", report.truncation_error},
           {"converging", report.converging},
           {"overlap_upper_bound", overlap_upper_bound(lambda, model.kernel())}};
    for (const auto& r : report.rows) {
      for (const auto& [obs, value] : {std::pair{"E", r.energy}, {"rho", r.rho}, {"gap", r.gap}}) {
        CsvRow row{"fock_validate", id, lambda * lambda / 8.0, lambda, std::nullopt, r.n_max};
        row.mean = value;
        row.seed = c.seed();
        row.observable = obs;
        res.rows.push_back(row);
      }
      e["rows"].push_back({{"n_max", r.n_max}, {"E", r.energy}, {"rho", r.rho}, {"gap", r.gap}});
    }
    if (c.has("fock.T")) {
      model.n_max = cutoffs.back();
      const double T = c.real("fock.T");
      CsvRow row{"fock_validate", id, lambda * lambda / 8.0, lambda, T, cutoffs.back()};
      row.mean = semigroup_overlap(model, T);
      row.seed = c.seed();
      row.observable = "semigroup_overlap";
      res.rows.push_back(row);
      e["semigroup_overlap"] = row.mean;
    }
    res.summary["lambdas"].push_back(e);
  }
  return res;
}

inline ExperimentResult run_fk_identity(const Config& c) {
  const Kernel kernel = c.kernel();
  const double T = c.real("lattice.T");
  const auto N = c.integer("lattice.N");
  if (N < 1 || N + 1 > static_cast<std::int64_t>(kMaxFkEnumerationSites))
    throw ConfigError("lattice.N", "must be between 1 and 4 (exact FK enumeration on at most 5 vertices)");
  ExperimentResult res;
  res.summary = {{"kind", "fk_identity"}, {"kernel", kernel.id()}, {"T", T}, {"N", N}};
  double worst = 0.0;
  for (double alpha : c.reals("lattice.alpha_list")) {
    LatticeModel model = [&] {
      try {
        return LatticeModel(T, static_cast<std::size_t>(N), alpha, kernel);
      } catch (const ValidationError& e) {
        throw ConfigError("lattice.T", e.what());
      }
    }();
    for (std::int64_t k = 1; k <= N; ++k) {
      const double ising = exact_correlation(model, {0, static_cast<std::size_t>(k)});
      const double fk = exact_fk_two_point(model, 0, static_cast<std::size_t>(k));
      worst = std::max(worst, std::abs(ising - fk));
      const double t = static_cast<double>(k) * model.spacing();
      for (const auto& [obs, value] : {std::pair{"ising_correlation", ising}, {"fk_connection", fk},
                                       {"abs_difference", std::abs(ising - fk)}}) {
        CsvRow row{"fk_identity", kernel.id(), alpha, std::nullopt, T, N, t};
        row.mean = value;
        row.std_error = 0.0;
        row.seed = c.seed();
        row.observable = obs;
        res.rows.push_back(row);
      }
    }
  }
  res.summary["max_abs_difference"] = worst;
  return res;
}

}  // namespace detail

inline ExperimentResult run_experiment(const Config& c, std::size_t workers) {
  switch (c.kind()) {
    case ExperimentKind::Correlation: return detail::run_correlation(c, workers);
    case ExperimentKind::Susceptibility: return detail::run_susceptibility(c, workers);
    case ExperimentKind::RhoRatio: return detail::run_rho_ratio(c, workers);
    case ExperimentKind::RhoSeries: return detail::run_rho_series(c, workers);
    case ExperimentKind::PercolationTwoPoint: return detail::run_percolation_two_point(c);
    case ExperimentKind::AppendixConvergence: return detail::run_appendix(c);
    case ExperimentKind::LroScan: return detail::run_lro(c, workers);
    case ExperimentKind::FockValidate: return detail::run_fock(c);
    case ExperimentKind::FkIdentity: return detail::run_fk_identity(c);
  }
  throw UsageError("unknown experiment kind");
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 computation failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

/// Workers actually used: the configured count, capped by SBISING_MAX_WORKERS.
inline std::size_t effective_workers(std::size_t configured) {
  std::size_t w = std::max<std::size_t>(1, configured);
  if (const char* cap = std::getenv("SBISING_MAX_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v >= 1) w = std::min<std::size_t>(w, static_cast<std::size_t>(v));
  }
  return w;
}

struct RunOutcome {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  json manifest;
};

/// Runs the experiment and writes its artifacts. `config_text` is the raw
/// file content, hashed into the manifest.
inline RunOutcome run_and_write(const Config& c, const std::string& config_text) {
  const auto start = std::chrono::system_clock::now();
  const std::size_t workers = effective_workers(c.workers());
  const ExperimentResult result = run_experiment(c, workers);
  const auto end = std::chrono::system_clock::now();

  RunOutcome out;
  out.directory = c.output();
  std::filesystem::create_directories(out.directory);
  const std::vector<std::pair<std::string, std::string>> files{
      {to_string(c.kind()) + ".csv", to_csv(result.rows)},
      {"summary.json", result.summary.dump(2) + "\n"},
      {"config.ini", c.serialize()},
  };
  json checksums = json::object();
  for (const auto& [name, content] : files) {
    const auto path = out.directory / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error("cannot write " + path.string());
    checksums[name] = sha256_hex(content);
    out.files.push_back(path);
  }
  out.manifest = {{"tool", "sbising"},
                  {"tool_version", kVersion},
                  {"schema", kSchemaVersion},
                  {"kind", to_string(c.kind())},
                  {"seed", c.seed()},
                  {"workers", workers},
                  {"config_sha256", sha256_hex(config_text)},
                  {"started", utc_timestamp(start)},
                  {"finished", utc_timestamp(end)},
                  {"outputs", checksums}};
  const auto manifest_path = out.directory / "manifest.json";
  std::ofstream m(manifest_path);
  m << out.manifest.dump(2) << "\n";
  if (!m) throw Error("cannot write " + manifest_path.string());
  out.files.push_back(manifest_path);
  return out;
}

}  // namespace sbising::cli
