#pragma once

// Run configuration: flat dotted-key JSON documents, built-in presets for the
// reference experiments, and the merged/resolved view written into every
// output file.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "islchan/errors.hpp"
#include "islchan/simharness.hpp"

namespace islchan::config {

using json = nlohmann::ordered_json;

enum class RunKind { time_varying, angle_sweep, state_trace };

inline std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::angle_sweep: return "angle_sweep";
    case RunKind::state_trace: return "state_trace";
    default: return "time_varying";
  }
}

struct Resolved {
  sim::LinkConfig link;
  sim::CaseSpec case_spec;
  RunKind kind = RunKind::time_varying;
  std::string preset;  ///< empty when none
  json document;       ///< merged flat document after defaults
};

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline json common_block() {
  return json{{"modulation", "4QAM"},     {"n_samples", 1000000},   {"bandwidth_hz", 1e6},
              {"carrier_hz", 10e9},       {"t_cmb_k", 2.7255},      {"sample_period_s", 1e-5},
              {"pathloss_exp", 2.0},      {"kappa", 0.05},          {"elevation_deg", 0.0},
              {"s_csee_var", 0.0},        {"snr_db.min", 0.0},      {"snr_db.max", 30.0},
              {"snr_db.step", 5.0}};
}

inline json time_varying_case(const char* id, double nu, double phi, double d_s, json gamma) {
  json j = common_block();
  j.update(json{{"run.kind", "time_varying"},
                {"geometry.d1_km", 60.0},
                {"markov.k", 3},
                {"case.id", id},
                {"case.nu_kms", nu},
                {"case.phi_deg", phi},
                {"case.d_s_km", d_s},
                {"case.gamma", gamma},
                {"case.tau_t_s", 10.0},
                {"case.initial_state", 2},
                {"case.rate_threshold", 2.0}});
  return j;
}

}  // namespace detail

inline const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> p = [] {
    std::map<std::string, json> m;
    m["case1"] = detail::time_varying_case("I", 2.0, 30.0, 69.28, "inf");
    m["case2"] = detail::time_varying_case("II", 2.0, 2.0, 60.03, 8.6193);
    m["case3"] = detail::time_varying_case("III", 2.0, 0.0, 60.0, 0.0);
    m["case4"] = detail::time_varying_case("IV", 4.0, 30.0, 69.28, "inf");

    json sweep = detail::common_block();
    sweep.update(json{{"run.kind", "angle_sweep"},
                      {"geometry.d1_km", 10.0},
                      {"geometry.nu_kms", 0.1},
                      {"markov.k", 1},
                      {"markov.transition", json::array({json::array({1.0})})},
                      {"states.labels", json::array({"SINGLE"})},
                      {"states.omega", json::array({1.0})},
                      {"sbpa.priorities", json::array({1.0})},
                      {"case.id", "custom"},
                      {"case.initial_state", 0},
                      {"case.rate_threshold", 2.0},
                      {"sweep.phi_min_deg", -3.0},
                      {"sweep.phi_max_deg", 3.0},
                      {"sweep.phi_step_deg", 0.5}});
    m["angle_sweep"] = sweep;

    json trace = detail::time_varying_case("custom", 2.0, 2.0, 60.03, 8.6193);
    trace["run.kind"] = "state_trace";
    trace["case.tau_t_s"] = 100.0;
    trace["n_samples"] = 10000000;
    m["fig4_state_trace"] = trace;
    return m;
  }();
  return p;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string line_info(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T>
T get(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

inline double get_number(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t get_count(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError("key '" + key + "' must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d < 0.0 || d != std::floor(d)) throw ConfigError("key '" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }
  throw ConfigError("key '" + key + "' must be an integer");
}

inline std::optional<KFactor> get_gamma(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return INFINITE_K;
    if (s == "auto") return std::nullopt;
    throw ConfigError("key '" + key + "' must be a number, \"inf\" or \"auto\"");
  }
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number, \"inf\" or \"auto\"");
  return KFactor(v.get<double>());
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> k{
      "modulation", "n_samples", "bandwidth_hz", "carrier_hz", "t_cmb_k", "sample_period_s",
      "pathloss_exp", "kappa", "elevation_deg", "s_csee_var", "snr_db", "snr_db.min", "snr_db.max",
      "snr_db.step", "geometry.d1_km", "geometry.phi_deg", "geometry.nu_kms",
      "doppler.transverse_model", "scint.a1", "scint.a2", "scint.theta0_deg", "scint.xi_deg",
      "markov.k", "markov.transition", "markov.samples_per_step", "markov.reference_speed_kms",
      "states.labels", "states.omega", "states.gamma_omega", "sbpa.priorities", "sbpa.rho_mw",
      "sbpa.report_snr_db", "sos.n_sinusoids", "seed", "workers", "sweep.phi_min_deg",
      "sweep.phi_max_deg", "sweep.phi_step_deg", "case.id", "case.nu_kms", "case.phi_deg",
      "case.d_s_km", "case.gamma", "case.tau_t_s", "case.initial_state", "case.rate_threshold",
      "run.kind"};
  return k;
}

inline std::vector<double> snr_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("snr_db range must satisfy min <= max and step > 0");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

struct TableCase {
  sim::CaseId id;
  double nu, phi, d_s;
  KFactor gamma;
};

inline const std::vector<TableCase>& table_cases() {
  static const std::vector<TableCase> t{{sim::CaseId::I, 2.0, 30.0, 69.28, INFINITE_K},
                                        {sim::CaseId::II, 2.0, 2.0, 60.03, KFactor(8.6193)},
                                        {sim::CaseId::III, 2.0, 0.0, 60.0, KFactor(0.0)},
                                        {sim::CaseId::IV, 4.0, 30.0, 69.28, INFINITE_K}};
  return t;
}

inline sim::CaseId case_id_from(const std::string& s) {
  if (s == "I" || s == "1") return sim::CaseId::I;
  if (s == "II" || s == "2") return sim::CaseId::II;
  if (s == "III" || s == "3") return sim::CaseId::III;
  if (s == "IV" || s == "4") return sim::CaseId::IV;
  if (s == "custom") return sim::CaseId::custom;
  throw ConfigError("case.id must be one of I, II, III, IV, custom");
}

/// A named reference case must keep its tabulated values.
inline void check_table_case(const sim::CaseSpec& c) {
  if (c.id == sim::CaseId::custom) return;
  for (const auto& t : table_cases()) {
    if (t.id != c.id) continue;
    auto bad = [&](const char* what) {
      throw ConfigError(std::string("case.id=") + sim::case_name(c.id) + " fixes " + what +
                        "; use case.id=custom to change it");
    };
    if (c.nu_kms != t.nu) bad("case.nu_kms");
    if (c.phi_deg != t.phi) bad("case.phi_deg");
    if (std::abs(c.d_s_km - t.d_s) > 0.01) bad("case.d_s_km");
    if (!c.gamma || !(*c.gamma == t.gamma)) bad("case.gamma");
    if (c.tau_t_s != 10.0) bad("case.tau_t_s");
    if (c.initial_state != 2) bad("case.initial_state");
    if (c.rate_threshold != 2.0) bad("case.rate_threshold");
  }
}

}  // namespace detail

/// Parses a flat JSON document; errors carry line/column.
inline json parse_document(const std::string& text, const std::string& origin = "<config>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": parse error at " + detail::line_info(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto& known = detail::known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(origin + ": unknown key '" + key + "'");
  }
  return doc;
}

inline json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), path);
}

/// Defaults + preset + document, later layers overriding earlier ones, then
/// validated into typed structures.
inline Resolved resolve(const json& document, const std::string& preset = {}) {
  json merged = detail::common_block();
  merged.update(detail::time_varying_case("custom", 2.0, 30.0, 69.28, "inf"));
  if (!preset.empty()) {
    const auto it = presets().find(preset);
    if (it == presets().end()) throw ConfigError("unknown preset '" + preset + "'");
    merged.update(it->second);
  }
  merged.update(document);

  Resolved r;
  r.preset = preset;
  sim::LinkConfig& c = r.link;
  sim::CaseSpec& cs = r.case_spec;
  using detail::get;
  using detail::get_count;
  using detail::get_number;
  auto has = [&](const char* k) { return merged.contains(k); };

  c.modulation = get<std::string>(merged, "modulation");
  c.n_samples = get_count(merged, "n_samples");
  c.bandwidth_hz = get_number(merged, "bandwidth_hz");
  c.geometry.carrier_hz = get_number(merged, "carrier_hz");
  c.t_cmb_k = get_number(merged, "t_cmb_k");
  c.sample_period_s = get_number(merged, "sample_period_s");
  c.pathloss_exp = get_number(merged, "pathloss_exp");
  c.kappa = get_number(merged, "kappa");
  c.geometry.elevation_deg = get_number(merged, "elevation_deg");
  if (c.geometry.elevation_deg != 0.0) throw ConfigError("elevation_deg must be 0 (only theta = 0 is modelled)");
  c.s_csee_var = get_number(merged, "s_csee_var");

  if (has("snr_db")) {
    c.snr_db = get<std::vector<double>>(merged, "snr_db");
  } else {
    c.snr_db = detail::snr_grid(get_number(merged, "snr_db.min"), get_number(merged, "snr_db.max"),
                                get_number(merged, "snr_db.step"));
  }

  if (has("geometry.d1_km")) c.geometry.d1_km = get_number(merged, "geometry.d1_km");
  if (has("geometry.phi_deg")) c.geometry.phi_deg = get_number(merged, "geometry.phi_deg");
  if (has("geometry.nu_kms")) c.geometry.nu_kms = get_number(merged, "geometry.nu_kms");
  if (has("doppler.transverse_model"))
    c.transverse = orbitgeom::transverse_model_from_string(get<std::string>(merged, "doppler.transverse_model"));
  if (has("scint.a1")) c.scint.a1 = get_number(merged, "scint.a1");
  if (has("scint.a2")) c.scint.a2 = get_number(merged, "scint.a2");
  if (has("scint.theta0_deg")) c.scint.theta0_deg = get_number(merged, "scint.theta0_deg");
  if (has("scint.xi_deg")) c.scint.xi_deg = get_number(merged, "scint.xi_deg");

  if (has("markov.transition")) c.transition = get<std::vector<std::vector<double>>>(merged, "markov.transition");
  if (has("markov.k") && get_count(merged, "markov.k") != c.transition.size())
    throw ConfigError("markov.k does not match the size of markov.transition");
  if (has("markov.samples_per_step")) c.samples_per_step = get_count(merged, "markov.samples_per_step");
  if (has("markov.reference_speed_kms")) c.reference_speed_kms = get_number(merged, "markov.reference_speed_kms");
  if (has("states.labels")) c.state_labels = get<std::vector<std::string>>(merged, "states.labels");
  if (has("states.omega")) c.state_omega = get<std::vector<double>>(merged, "states.omega");
  if (has("states.gamma_omega")) c.gamma_omega = get<std::vector<double>>(merged, "states.gamma_omega");
  if (has("sbpa.priorities")) c.priorities = get<std::vector<double>>(merged, "sbpa.priorities");
  if (has("sbpa.rho_mw")) c.rho_mw = get_number(merged, "sbpa.rho_mw");
  if (has("sbpa.report_snr_db")) c.report_snr_db = get_number(merged, "sbpa.report_snr_db");
  if (has("sos.n_sinusoids")) c.n_sinusoids = static_cast<int>(get_count(merged, "sos.n_sinusoids"));
  if (has("seed")) c.seed = get_count(merged, "seed");
  if (has("workers")) c.workers = static_cast<unsigned>(get_count(merged, "workers"));
  if (has("sweep.phi_min_deg")) c.sweep_phi_min_deg = get_number(merged, "sweep.phi_min_deg");
  if (has("sweep.phi_max_deg")) c.sweep_phi_max_deg = get_number(merged, "sweep.phi_max_deg");
  if (has("sweep.phi_step_deg")) c.sweep_phi_step_deg = get_number(merged, "sweep.phi_step_deg");

  cs.id = detail::case_id_from(get<std::string>(merged, "case.id"));
  cs.nu_kms = get_number(merged, "case.nu_kms");
  cs.phi_deg = get_number(merged, "case.phi_deg");
  cs.d_s_km = get_number(merged, "case.d_s_km");
  cs.gamma = detail::get_gamma(merged, "case.gamma");
  cs.tau_t_s = get_number(merged, "case.tau_t_s");
  cs.initial_state = get_count(merged, "case.initial_state");
  cs.rate_threshold = get_number(merged, "case.rate_threshold");

  const auto kind = get<std::string>(merged, "run.kind");
  if (kind == "time_varying") r.kind = RunKind::time_varying;
  else if (kind == "angle_sweep") r.kind = RunKind::angle_sweep;
  else if (kind == "state_trace") r.kind = RunKind::state_trace;
  else throw ConfigError("run.kind must be time_varying, angle_sweep or state_trace");

  try {
    c.validate();
    cs.validate(c.states());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  detail::check_table_case(cs);
  if (r.kind == RunKind::state_trace)
    c.n_samples = static_cast<std::uint64_t>(std::llround(cs.tau_t_s / c.sample_period_s));

  // worker count never changes results, so it stays out of the echo
  merged.erase("workers");
  merged["seed"] = c.seed;
  r.document = std::move(merged);
  return r;
}

/// load_config: file (may be empty for preset-only runs) plus optional preset.
inline Resolved load_config(const std::string& path, const std::string& preset = {}) {
  const json doc = path.empty() ? json::object() : read_document(path);
  return resolve(doc, preset);
}

/// Metadata lines embedded at the top of every output file.
inline std::vector<std::string> metadata_lines(const Resolved& r, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> lines;
#ifdef ISLCHAN_VERSION
  lines.push_back(std::string("islsim version ") + ISLCHAN_VERSION);
#endif
  lines.push_back("preset: " + (r.preset.empty() ? std::string("none") : r.preset));
  lines.push_back("seed: " + std::to_string(r.link.seed));
  lines.push_back("config: " + r.document.dump());
  for (const auto& e : extra) lines.push_back(e);
  return lines;
}

}  // namespace islchan::config
