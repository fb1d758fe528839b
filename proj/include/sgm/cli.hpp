#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgm/config.hpp"
#include "sgm/csv.hpp"
#include "sgm/plot.hpp"

namespace sgm::cli {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAcceptance = 3;

inline std::string default_output_dir() {
  if (const char* env = std::getenv("SGM_OUT_DIR")) return env;
  return "sgm_out";
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_metrics_csv(const fs::path& path, const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "seed,t,f_gap,grad_norm_sq,v_norm_sq,z_gap\n";
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.sample_grid.size(); ++i) {
      out << rec.seed_index << ',' << rec.sample_grid[i] << ',' << format_double(rec.f_gap[i])
          << ',' << format_double(rec.grad_norm_sq[i]) << ',' << format_double(rec.v_norm_sq[i])
          << ',' << format_double(rec.z_gap[i]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_fits_csv(const fs::path& path, const std::vector<SeriesFit>& fits) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "seed,series,exponent,r_squared,window_lo,window_hi\n";
  for (const auto& sf : fits) {
    out << sf.seed_index << ',' << sf.series << ',' << format_double(sf.fit.exponent) << ','
        << format_double(sf.fit.r_squared) << ',' << sf.fit.window_lo << ',' << sf.fit.window_hi
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct AcceptanceOutcome {
  bool configured = false;
  bool passed = true;
  std::vector<std::string> lines;
};

/// Per-seed fits for any recorded series, computed on demand so acceptance
/// checks are not limited to the regime's default fit set.
inline std::vector<RateFit> fits_for_any_series(const ExperimentResult& result,
                                                const std::string& series,
                                                double window_fraction) {
  std::vector<RateFit> fits = fits_for_series(result, series);
  if (!fits.empty()) return fits;
  for (const auto& rec : result.records) {
    if (rec.diverged) continue;
    fits.push_back(fit_rate(rec.sample_grid, series_by_name(rec, series), window_fraction));
  }
  return fits;
}

/// Evaluates the optional "acceptance" block: per-series exponent thresholds
/// on the seed quantile / minimum, plus a diverged-fraction bound. Thresholds
/// are data, not code.
inline AcceptanceOutcome evaluate_acceptance(const json& config, const ExperimentResult& result,
                                             double window_fraction = 0.5) {
  AcceptanceOutcome out;
  if (!config.contains("acceptance")) return out;
  out.configured = true;
  const json& acc = config.at("acceptance");

  if (acc.contains("max_diverged_fraction")) {
    const double lim = acc.at("max_diverged_fraction").get<double>();
    const bool ok = result.diverged_fraction <= lim;
    out.passed = out.passed && ok;
    std::ostringstream line;
    line << (ok ? "pass" : "FAIL") << " diverged_fraction " << result.diverged_fraction
         << " <= " << lim;
    out.lines.push_back(line.str());
  }

  for (const json& check : acc.value("checks", json::array())) {
    const std::string series = check.at("series").get<std::string>();
    const auto fits = fits_for_any_series(result, series, window_fraction);
    std::ostringstream line;
    if (fits.size() < 10) {
      out.passed = false;
      line << "FAIL " << series << ": only " << fits.size() << " fits (need >= 10)";
      out.lines.push_back(line.str());
      continue;
    }
    const double q = check.value("quantile", 0.05);
    const AggregateReport agg = almost_sure_aggregate(fits, q);
    bool ok = true;
    line << series << ": q" << q << "-exponent " << agg.quantile_exponent;
    if (check.contains("min_quantile_exponent")) {
      const double thr = check.at("min_quantile_exponent").get<double>();
      line << " (need >= " << thr << ")";
      ok = ok && agg.quantile_exponent >= thr;
    }
    if (check.contains("min_exponent")) {
      const double thr = check.at("min_exponent").get<double>();
      line << ", min " << agg.min_exponent() << " (need >= " << thr << ")";
      ok = ok && agg.min_exponent() >= thr;
    }
    out.passed = out.passed && ok;
    out.lines.push_back((ok ? "pass " : "FAIL ") + line.str());
  }
  return out;
}

inline std::string summary_text(const json& config, const ExperimentResult& result,
                                const std::string& dig, const AcceptanceOutcome& acc) {
  std::ostringstream s;
  s << "config_digest: " << dig << "\n";
  s << "n_seeds: " << result.records.size() << "\n";
  s << "diverged_fraction: " << format_double(result.diverged_fraction) << "\n";
  s << "effective_schedule: " << schedule_to_json(result.effective).dump() << "\n";
  const double q = config.at("fit").at("quantile").get<double>();
  for (const auto& name : result.fit_series) {
    const auto fits = fits_for_series(result, name);
    s << "series " << name << ": fits " << fits.size();
    if (fits.size() >= 10) {
      const AggregateReport agg = almost_sure_aggregate(fits, q);
      s << ", quantile_" << q << "_exponent " << format_double(agg.quantile_exponent)
        << ", min_exponent " << format_double(agg.min_exponent()) << ", max_exponent "
        << format_double(agg.exponents_sorted.back());
    }
    s << "\n";
  }
  if (acc.configured) {
    s << "acceptance: " << (acc.passed ? "pass" : "FAIL") << "\n";
    for (const auto& line : acc.lines) s << "  " << line << "\n";
  }
  return s.str();
}

/// `run`: execute an experiment config, write manifest + metrics + fits +
/// summary. Exit 0 on success, 2 on validation problems, 3 when embedded
/// acceptance thresholds are not met.
inline int cmd_run(const std::string& config_path, const std::string& output_dir,
                   const std::vector<std::string>& overrides, std::ostream& err = std::cerr) {
  json raw;
  try {
    raw = load_json_file(config_path);
    if (raw.contains("config") && raw.contains("digest")) raw = raw.at("config");  // manifest input
    raw = normalize_experiment_config(raw);  // fill defaults so overrides can address them
    for (const auto& o : overrides) apply_override(raw, o);
    raw = normalize_experiment_config(raw);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  Experiment ex;
  try {
    ex = experiment_from_json(raw);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const double wf = raw.at("fit").at("window_fraction").get<double>();
  ExperimentResult result = run_experiment(ex, wf);

  fs::path dir(output_dir);
  fs::create_directories(dir);
  json manifest;
  manifest["config"] = raw;
  manifest["digest"] = ex.config_digest;
  manifest["effective"] = {{"schedule", schedule_to_json(result.effective)},
                           {"binding_step_cap", binding_step_cap(*ex.problem, *ex.oracle, ex.beta)},
                           {"fit_series", result.fit_series},
                           {"declared_A", ex.oracle->declared_A()},
                           {"declared_B", ex.oracle->declared_B()},
                           {"declared_C", ex.oracle->declared_C()}};
  manifest["version"] = "sgm 0.1.0";
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_metrics_csv(dir / "metrics.csv", result.records);
  write_fits_csv(dir / "fits.csv", result.fits);
  const AcceptanceOutcome acc = evaluate_acceptance(raw, result, wf);
  write_text(dir / "summary.txt", summary_text(raw, result, ex.config_digest, acc));

  if (acc.configured && !acc.passed) {
    err << "acceptance thresholds not met (see summary.txt)\n";
    return kExitAcceptance;
  }
  return kExitOk;
}

/// `lemma-sim`: run configured recursion specs across seeds and emit one
/// verdict row per (spec, seed) plus scaled-series samples for plotting.
inline int cmd_lemma_sim(const std::string& config_path, const std::string& output_dir,
                         std::ostream& err = std::cerr) {
  json raw;
  std::vector<RecursionSpec> specs;
  std::vector<json> spec_json;
  try {
    raw = load_json_file(config_path);
    if (!raw.contains("specs") || !raw.at("specs").is_array() || raw.at("specs").empty())
      throw ConfigError("lemma-sim config needs a non-empty 'specs' array");
    for (const json& js : raw.at("specs")) {
      specs.push_back(recursion_spec_from_json(js));
      spec_json.push_back(js);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const auto n_seeds = raw.value("seeds", std::uint64_t{1});
  const auto master_seed = raw.value("master_seed", std::uint64_t{0});

  fs::path dir(output_dir);
  fs::create_directories(dir);
  std::ofstream verdicts(dir / "verdicts.csv");
  std::ofstream series(dir / "lemma_series.csv");
  if (!verdicts || !series) {
    err << "error: cannot write outputs in " << output_dir << "\n";
    return kExitValidation;
  }
  verdicts << "spec,kind,seed,stat_1,stat_2,stat_3,metric,pass\n";
  series << "spec,seed,t,y,scaled\n";

  bool all_pass = true;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const RecursionSpec& spec = specs[si];
    const json& js = spec_json[si];
    std::vector<std::uint64_t> horizons =
        js.value("horizons", std::vector<std::uint64_t>{spec.horizon / 100, spec.horizon / 10,
                                                        spec.horizon});
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
      RandomStream rng = RandomStream::derived(master_seed, (si << 20) + seed);
      std::string kind;
      double s1 = 0, s2 = 0, s3 = 0, metric = 0;
      bool pass = true;
      RecursionTrace trace;
      if (std::holds_alternative<StrongCaseSpec>(spec.kind)) {
        kind = "strong";
        trace = simulate_strong_recursion(spec, rng);
        s1 = tail_max_scaled(trace, horizons[0]);
        s2 = tail_max_scaled(trace, horizons[1]);
        s3 = tail_max_scaled(trace, horizons[2]);
        metric = s3;
        if (js.value("require_monotone", true)) pass = s1 > s2 && s2 > s3;
      } else if (std::holds_alternative<RobbinsSiegmundSpec>(spec.kind)) {
        kind = "robbins_siegmund";
        auto res = simulate_robbins_siegmund(spec, rng);
        trace = std::move(res.trace);
        s1 = res.tail_oscillation;
        s2 = res.sum_x;
        s3 = res.y_converges ? 1.0 : 0.0;
        metric = res.tail_oscillation;
        pass = std::isfinite(res.sum_x) &&
               res.tail_oscillation < js.value("max_tail_oscillation", 1e-6);
      } else {
        kind = "convex";
        trace = simulate_convex_recursion(spec, rng);
        s1 = tail_max_scaled(trace, horizons[0]);
        s2 = tail_max_scaled(trace, horizons[1]);
        s3 = tail_max_scaled(trace, horizons[2]);
        const double lo = std::min({s1, s2, s3}), hi = std::max({s1, s2, s3});
        metric = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        pass = metric < js.value("max_variation", 2.0);
      }
      all_pass = all_pass && pass;
      verdicts << si << ',' << kind << ',' << seed << ',' << format_double(s1) << ','
               << format_double(s2) << ',' << format_double(s3) << ',' << format_double(metric)
               << ',' << (pass ? 1 : 0) << '\n';
      for (std::size_t i = 0; i < trace.grid.size(); ++i)
        series << si << ',' << seed << ',' << trace.grid[i] << ',' << format_double(trace.y[i])
               << ',' << format_double(trace.scaled[i]) << '\n';
    }
  }
  return all_pass ? kExitOk : kExitAcceptance;
}

/// `analyze`: recompute fits and the aggregate from an existing run directory
/// (the on-grid series; the run's own fits.csv carries the exact online ones).
inline int cmd_analyze(const std::string& run_dir, const std::string& output_dir,
                       double window_fraction, double quantile, std::ostream& err = std::cerr) {
  CsvTable metrics;
  try {
    metrics = read_csv((fs::path(run_dir) / "metrics.csv").string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const int cseed = metrics.column("seed"), ct = metrics.column("t");
  const int cf = metrics.column("f_gap"), cg = metrics.column("grad_norm_sq");
  if (cseed < 0 || ct < 0 || cf < 0 || cg < 0 || metrics.rows.empty()) {
    err << "error: metrics.csv lacks the expected columns/rows\n";
    return kExitValidation;
  }

  std::map<std::uint64_t, std::pair<std::vector<std::uint64_t>, std::vector<std::vector<double>>>>
      by_seed;  // seed -> (grid, {f_gap, grad})
  for (const auto& row : metrics.rows) {
    auto& entry = by_seed[static_cast<std::uint64_t>(row[cseed])];
    if (entry.second.empty()) entry.second.resize(2);
    entry.first.push_back(static_cast<std::uint64_t>(row[ct]));
    entry.second[0].push_back(row[cf]);
    entry.second[1].push_back(row[cg]);
  }

  std::vector<SeriesFit> fits;
  for (auto& [seed, data] : by_seed) {
    auto& [grid, cols] = data;
    try {
      fits.push_back({seed, "f_gap", fit_rate(grid, cols[0], window_fraction)});
      fits.push_back({seed, "grad_min_grid", fit_rate(grid, running_min(cols[1]), window_fraction)});
    } catch (const std::exception&) {
      // too-short or floor-bound tails are skipped, as in run_experiment's own policy
    }
  }

  fs::path dir(output_dir);
  fs::create_directories(dir);
  write_fits_csv(dir / "fits.csv", fits);
  std::ostringstream s;
  s << "source: " << run_dir << "\n";
  for (const std::string name : {"f_gap", "grad_min_grid"}) {
    std::vector<RateFit> sel;
    for (const auto& sf : fits)
      if (sf.series == name) sel.push_back(sf.fit);
    s << "series " << name << ": fits " << sel.size();
    if (sel.size() >= 10) {
      const AggregateReport agg = almost_sure_aggregate(sel, quantile);
      s << ", quantile_" << quantile << "_exponent " << format_double(agg.quantile_exponent)
        << ", min_exponent " << format_double(agg.min_exponent());
    }
    s << "\n";
  }
  write_text(dir / "summary.txt", s.str());
  return kExitOk;
}

inline int cmd_list_problems(std::ostream& out = std::cout) {
  out << "quadratic                     d, mu, L, seed   strongly convex; spectrum log-spread on [mu, L]\n"
      << "rank_deficient_least_squares  d, rank, L, seed general convex; f* = 0 on an affine set\n"
      << "smooth_nonconvex              d, amplitude     L = 1 + 2a; non-convex for a > 1/2\n";
  return kExitOk;
}

/// `plot`: one SVG per recorded series (plus the derived running min), each
/// with per-seed overlays and the fitted reference line in the legend.
inline int cmd_plot(const std::string& metrics_path, const std::string& output_dir,
                    std::ostream& err = std::cerr) {
  CsvTable metrics;
  try {
    metrics = read_csv(metrics_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const int cseed = metrics.column("seed"), ct = metrics.column("t");
  if (cseed < 0 || ct < 0 || metrics.rows.empty()) {
    err << "error: metrics csv has no usable rows\n";
    return kExitValidation;
  }

  fs::path dir(output_dir);
  fs::create_directories(dir);

  std::vector<std::pair<std::string, bool>> series_cols;  // name, derive_running_min
  for (const auto& name : {"f_gap", "grad_norm_sq", "v_norm_sq", "z_gap"})
    if (metrics.column(name) >= 0) series_cols.push_back({name, false});
  if (metrics.column("grad_norm_sq") >= 0) series_cols.push_back({"grad_min", true});

  for (const auto& [name, derived] : series_cols) {
    const int col = metrics.column(derived ? std::string("grad_norm_sq") : name);
    std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> by_seed;
    for (const auto& row : metrics.rows) {
      auto& e = by_seed[static_cast<std::uint64_t>(row[cseed])];
      e.first.push_back(row[ct]);
      e.second.push_back(row[col]);
    }
    LogLogPlot plot(name + std::string(" vs t"), "t", name);
    std::vector<RateFit> fits;
    for (auto& [seed, xy] : by_seed) {
      std::vector<double> vals = derived ? running_min(xy.second) : xy.second;
      plot.add_series(xy.first, vals);
      std::vector<std::uint64_t> grid(xy.first.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = static_cast<std::uint64_t>(xy.first[i]);
      try {
        fits.push_back(fit_rate(grid, vals));
      } catch (const std::exception&) {
      }
    }
    if (!fits.empty()) {
      std::sort(fits.begin(), fits.end(),
                [](const RateFit& a, const RateFit& b) { return a.exponent < b.exponent; });
      const RateFit& median = fits[fits.size() / 2];
      if (std::isfinite(median.exponent)) plot.set_fit(median.exponent, median.log_intercept);
    }
    if (!plot.has_data()) {
      err << "note: series " << name << " has no positive values, skipping its plot\n";
      continue;
    }
    try {
      plot.write((dir / (name + ".svg")).string());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
  }
  return kExitOk;
}

}  // namespace sgm::cli
