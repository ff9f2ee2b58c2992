#pragma once

// Run orchestration behind the islsim tool: manifest -> resolved config ->
// experiment -> CSV files. Kept in the library so tests can drive it
// without spawning processes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "islchan/config.hpp"
#include "islchan/simharness.hpp"

namespace islchan::cli {

enum ExitCode : int { ok = 0, config_error = 2, runtime_error = 3 };

struct RunManifest {
  std::string config_path;                  ///< empty: preset/defaults only
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed_override;
  std::string output_dir = "out";
  std::string sbpa = "both";                ///< on | off | both
  std::optional<std::string> snr_db;        ///< "a:b:step"
  std::optional<unsigned> workers;
};

/// "a:b:step" -> {a, b, step}.
inline std::vector<double> parse_snr_range(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("--snr-db expects a:b:step, got '" + s + "'");
    }
  }
  if (v.size() != 3) throw ConfigError("--snr-db expects a:b:step, got '" + s + "'");
  return v;
}

/// File document with command-line overrides layered on top.
inline config::Resolved resolve_manifest(const RunManifest& m) {
  config::json doc = m.config_path.empty() ? config::json::object() : config::read_document(m.config_path);
  if (m.seed_override) doc["seed"] = *m.seed_override;
  if (m.workers) doc["workers"] = *m.workers;
  if (m.snr_db) {
    const auto r = parse_snr_range(*m.snr_db);
    doc.erase("snr_db");
    doc["snr_db.min"] = r[0];
    doc["snr_db.max"] = r[1];
    doc["snr_db.step"] = r[2];
  }
  if (m.sbpa != "on" && m.sbpa != "off" && m.sbpa != "both")
    throw ConfigError("--sbpa must be on, off or both");
  return config::resolve(doc, m.preset.value_or(""));
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  return f;
}

inline void close_out(std::ofstream& f, const std::filesystem::path& p) {
  f.close();
  if (!f) throw Error("failed writing '" + p.string() + "'");
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::vector<std::string> run_lines(const sim::LinkRunResult& r) {
  std::string th;
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) th += (i ? " " : "") + fmt("%.9g", r.thresholds[i]);
  return {"case: " + r.case_id,
          "gamma_omega thresholds: " + th,
          "k_factor: " + r.gamma.to_string(),
          "d_s_km: " + fmt("%.6f", r.d_s_km),
          "path_loss_db: " + fmt("%.6f", r.path_loss_db),
          "f_dop_max_hz: " + fmt("%.6f", r.f_dop_max_hz),
          "f_los_hz: " + fmt("%.6f", r.f_los_hz),
          "noise_power_w: " + fmt("%.9g", r.noise_power_w),
          "noise_power_dbm: " + fmt("%.6f", solarchan::watts_to_dbm(r.noise_power_w)),
          "snr axis: rho*Omega_ref/noise with Omega_ref = 1; raw rho [dBm] = snr_db + noise_power_dbm",
          "samples_per_step: " + std::to_string(r.samples_per_step)};
}

inline void write_metadata_json(const std::filesystem::path& p, const config::Resolved& r,
                                const std::vector<std::string>& lines) {
  config::json meta;
#ifdef ISLCHAN_VERSION
  meta["version"] = ISLCHAN_VERSION;
#endif
  meta["preset"] = r.preset;
  meta["seed"] = r.link.seed;
  meta["run_kind"] = config::to_string(r.kind);
  meta["config"] = r.document;
  meta["notes"] = lines;
  auto f = open_out(p);
  f << meta.dump(2) << '\n';
  close_out(f, p);
}

}  // namespace detail

/// Executes a resolved run into `out`. Throws on failure.
inline std::vector<std::filesystem::path> execute(const config::Resolved& r, const std::string& sbpa,
                                                  const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw Error("cannot create output directory '" + out.string() + "'");

  std::vector<fs::path> written;
  if (r.kind == config::RunKind::angle_sweep) {
    const auto s = sim::run_angle_sweep(r.link, r.case_spec.rate_threshold);
    const std::vector<std::string> extra{
        "d_s_km: " + detail::fmt("%.6f", s.d_s_km), "path_loss_db: " + detail::fmt("%.6f", s.path_loss_db),
        "f_dop_max_hz: " + detail::fmt("%.6f", s.f_dop_max_hz),
        "noise_power_w: " + detail::fmt("%.9g", s.noise_power_w)};
    const auto meta = config::metadata_lines(r, extra);
    const fs::path p = out / "sweep.csv";
    auto f = detail::open_out(p);
    sim::write_metadata(f, meta);
    sim::write_sweep_csv(f, s);
    detail::close_out(f, p);
    written.push_back(p);
    detail::write_metadata_json(out / "metadata.json", r, extra);
    written.push_back(out / "metadata.json");
    return written;
  }

  if (r.kind == config::RunKind::state_trace) {
    const auto plan = sim::plan_case(r.link, r.case_spec);
    const auto tr = sim::trace_states(r.link, plan, r.case_spec.initial_state, plan.chain);
    std::string th;
    for (std::size_t i = 0; i < plan.thresholds.size(); ++i)
      th += (i ? " " : "") + detail::fmt("%.9g", plan.thresholds[i]);
    const std::vector<std::string> extra{"gamma_omega thresholds: " + th,
                                         "k_factor: " + plan.gamma.to_string(),
                                         "transitions: " + std::to_string(tr.states.transitions())};
    const fs::path p = out / "state_trace.csv";
    auto f = detail::open_out(p);
    sim::write_metadata(f, config::metadata_lines(r, extra));
    statechain::write_state_trace_csv(f, tr.states, r.link.state_labels, tr.omega);
    detail::close_out(f, p);
    written.push_back(p);
    detail::write_metadata_json(out / "metadata.json", r, extra);
    written.push_back(out / "metadata.json");
    return written;
  }

  std::vector<sim::LinkRunResult> runs;
  if (sbpa == "on" || sbpa == "both") runs.push_back(sim::run_time_varying(r.link, r.case_spec, true));
  if (sbpa == "off" || sbpa == "both") runs.push_back(sim::run_time_varying(r.link, r.case_spec, false));
  const auto& first = runs.front();
  const auto extra = detail::run_lines(first);
  const auto meta = config::metadata_lines(r, extra);

  {
    const fs::path p = out / "results.csv";
    auto f = detail::open_out(p);
    sim::write_metadata(f, meta);
    sim::write_results_csv(f, runs);
    detail::close_out(f, p);
    written.push_back(p);
  }
  {
    const fs::path p = out / "state_trace.csv";
    auto f = detail::open_out(p);
    sim::write_metadata(f, meta);
    statechain::write_state_trace_csv(f, first.state_series, r.link.state_labels, first.omega_series);
    detail::close_out(f, p);
    written.push_back(p);
  }
  {
    const fs::path p = out / "allocation.csv";
    auto f = detail::open_out(p);
    auto m = meta;
    m.push_back("allocation mode: " + first.mode);
    sim::write_metadata(f, m);
    powalloc::write_allocation_csv(f, r.link.state_labels, first.policy, first.alloc, first.per_state_mean_rate);
    detail::close_out(f, p);
    written.push_back(p);
  }
  detail::write_metadata_json(out / "metadata.json", r, extra);
  written.push_back(out / "metadata.json");
  return written;
}

/// Full manifest run with exit-code mapping; diagnostics go to `err`.
inline int run(const RunManifest& m, std::ostream& log, std::ostream& err,
               std::optional<config::RunKind> force_kind = std::nullopt) {
  config::Resolved r;
  try {
    r = resolve_manifest(m);
    if (force_kind) r.kind = *force_kind;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }
  try {
    for (const auto& p : execute(r, m.sbpa, m.output_dir)) log << "wrote " << p.string() << '\n';
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
  return ok;
}

}  // namespace islchan::cli
