#pragma once

// End-to-end Monte Carlo link simulation.
//
// Signal model per sample:  y = h (sqrt(rho) x + d) + w
//   x  Gray-mapped unit-energy 4QAM symbol
//   d  transmit hardware distortion, CN(0, kappa^2 rho)
//   w  thermal noise, CN(0, sigma^2) with sigma^2 = k_B T_C B
// The receiver has the true h (perfect i-CSI), equalizes with one tap and
// slices to the nearest constellation point.
//
// The SNR axis is rho * Omega_ref / sigma^2 with Omega_ref = 1, the gain of
// the best state. Path loss is a fixed offset reported next to the results.
//
// Random numbers: every (case, SNR point, block) unit draws from its own
// substream, and the transmit mode is not part of the label, so SBPA and the
// conventional baseline see identical bits, noise and fading.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "islchan/constants.hpp"
#include "islchan/errors.hpp"
#include "islchan/fadegen.hpp"
#include "islchan/orbitgeom.hpp"
#include "islchan/parallel.hpp"
#include "islchan/powalloc.hpp"
#include "islchan/rng.hpp"
#include "islchan/solarchan.hpp"
#include "islchan/statechain.hpp"

namespace islchan::sim {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// 4QAM

inline constexpr double qam_amp = 0.70710678118654752440;

/// Gray mapping: first bit picks the I sign, second the Q sign, 0 -> +.
/// 00 -> (+1+j)/sqrt2, 01 -> (+1-j)/sqrt2, 10 -> (-1+j)/sqrt2, 11 -> (-1-j)/sqrt2.
inline cplx qam4_symbol(unsigned b0, unsigned b1) noexcept {
  return {b0 ? -qam_amp : qam_amp, b1 ? -qam_amp : qam_amp};
}

inline std::vector<cplx> qam4_modulate(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw DomainError("qam4_modulate: bit count must be even");
  std::vector<cplx> out(bits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = qam4_symbol(bits[2 * i] & 1u, bits[2 * i + 1] & 1u);
  return out;
}

/// Hard decision for one equalized sample.
inline void qam4_slice(cplx v, std::uint8_t& b0, std::uint8_t& b1) noexcept {
  b0 = v.real() < 0.0;
  b1 = v.imag() < 0.0;
}

inline std::vector<std::uint8_t> qam4_demodulate(std::span<const cplx> symbols) {
  std::vector<std::uint8_t> bits(2 * symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) qam4_slice(symbols[i], bits[2 * i], bits[2 * i + 1]);
  return bits;
}

// ---------------------------------------------------------------------------
// Channel and receiver

/// |h| below this is a numeric deep fade; the symbol is erased.
inline constexpr double erasure_threshold = 1e-12;

/// Transmit-side hardware distortion samples, CN(0, kappa^2 rho).
inline std::vector<cplx> hardware_distortion(std::size_t n, double rho, double kappa, Rng& rng) {
  std::vector<cplx> d(n);
  for (auto& v : d) v = rng.complex_normal(kappa * kappa * rho);
  return d;
}

/// One received sample. Draw order (distortion, then noise) is fixed.
inline cplx transmit_sample(cplx x, cplx h, double rho, double kappa, double noise_power, Rng& rng) {
  const cplx d = rng.complex_normal(kappa * kappa * rho);
  const cplx w = rng.complex_normal(noise_power);
  return h * (std::sqrt(rho) * x + d) + w;
}

inline std::vector<cplx> transmit(std::span<const cplx> x, std::span<const cplx> h, double rho,
                                  double kappa, double noise_power, Rng& rng) {
  if (x.size() != h.size()) throw DomainError("transmit: symbol and CIR streams must align");
  std::vector<cplx> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = transmit_sample(x[i], h[i], rho, kappa, noise_power, rng);
  return y;
}

struct Detection {
  std::vector<std::uint8_t> bits;    ///< two per symbol
  std::vector<std::uint8_t> erased;  ///< one per symbol
};

/// Zero-forcing y / (sqrt(rho) h), then nearest-point decision.
inline Detection equalize_and_detect(std::span<const cplx> y, std::span<const cplx> h, double rho) {
  if (y.size() != h.size()) throw DomainError("equalize_and_detect: streams must align");
  if (!(rho > 0.0)) throw DomainError("equalize_and_detect: rho must be > 0");
  Detection d;
  d.bits.resize(2 * y.size());
  d.erased.resize(y.size());
  const double g = std::sqrt(rho);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(h[i]) < erasure_threshold) {
      d.erased[i] = 1;
      continue;
    }
    qam4_slice(y[i] / (g * h[i]), d.bits[2 * i], d.bits[2 * i + 1]);
  }
  return d;
}

/// Bit error count with erased symbols contributing 0.5 per bit.
inline double count_bit_errors(std::span<const std::uint8_t> sent, const Detection& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.erased.size(); ++i) {
    if (d.erased[i]) {
      e += 1.0;
      continue;
    }
    e += (sent[2 * i] != d.bits[2 * i]) + (sent[2 * i + 1] != d.bits[2 * i + 1]);
  }
  return e;
}

/// Fraction of entries with rate strictly below the threshold.
inline double measure_outage(std::span<const double> rates, double threshold) {
  if (rates.empty()) throw DomainError("measure_outage: empty rate series");
  std::size_t n = 0;
  for (double r : rates) n += r < threshold;
  return static_cast<double>(n) / static_cast<double>(rates.size());
}

/// Instantaneous rate log2(1 + SINR), distortion counted as interference.
inline double instantaneous_rate(double rho, double gain, double kappa, double noise_power) {
  const double s = rho * gain;
  return std::log2(1.0 + s / (kappa * kappa * s + noise_power));
}

// ---------------------------------------------------------------------------
// Configuration

enum class CaseId { custom, I, II, III, IV };

inline std::string case_name(CaseId id) {
  switch (id) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::IV: return "IV";
    default: return "custom";
  }
}

struct CaseSpec {
  CaseId id = CaseId::custom;
  double nu_kms = 2.0;
  double phi_deg = 30.0;
  double d_s_km = 69.28;             ///< as tabulated; the harness recomputes from D1
  std::optional<KFactor> gamma;      ///< absent: derived from the scintillation model
  double tau_t_s = 10.0;
  std::size_t initial_state = 2;
  double rate_threshold = 2.0;       ///< Gamma_k, bps/Hz

  void validate(std::size_t k) const {
    if (!(nu_kms >= 0.0)) throw ConfigError("case.nu_kms must be >= 0");
    if (!(std::abs(phi_deg) < 90.0)) throw ConfigError("case.phi_deg must satisfy |phi| < 90");
    if (!(tau_t_s > 0.0)) throw ConfigError("case.tau_t_s must be > 0");
    if (initial_state >= k) throw ConfigError("case.initial_state must be < number of states");
    if (!(rate_threshold >= 0.0)) throw ConfigError("case.rate_threshold must be >= 0");
    if (gamma && !gamma->is_infinite() && !(gamma->value() >= 0.0))
      throw ConfigError("case.gamma must be >= 0 or inf");
  }
};

struct LinkConfig {
  std::string modulation = "4QAM";
  std::uint64_t n_samples = 1'000'000;
  double bandwidth_hz = 1e6;
  double sample_period_s = 1e-5;
  double t_cmb_k = constants::cmb_temperature;
  double kappa = 0.05;
  double pathloss_exp = 2.0;
  double s_csee_var = 0.0;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};

  orbitgeom::SepGeometry geometry{};
  orbitgeom::TransverseModel transverse = orbitgeom::TransverseModel::consistent;
  solarchan::ScintillationParams scint{};

  /// Markov chain in state-index order (0 = worst).
  std::vector<std::vector<double>> transition = statechain::reference_matrix().rows();
  std::vector<std::string> state_labels = statechain::three_state_labels();
  std::vector<double> state_omega{0.1, 0.5, 1.0};
  /// K-1 Gamma_Omega boundaries; empty means geometric midpoints of state_omega.
  std::vector<double> gamma_omega;
  std::uint64_t samples_per_step = 1000;  ///< at reference_speed_kms
  double reference_speed_kms = 2.0;

  std::vector<double> priorities{0.5, 1.0, 2.0};  ///< SBPA, per state index
  double rho_mw = 100.0;                          ///< reference power for the dBm report
  double report_snr_db = 10.0;                    ///< SNR point for per-state mean rates

  int n_sinusoids = fadegen::default_sinusoids;
  std::uint64_t seed = 1;
  unsigned workers = 0;

  double sweep_phi_min_deg = -3.0;
  double sweep_phi_max_deg = 3.0;
  double sweep_phi_step_deg = 0.5;

  std::size_t states() const { return transition.size(); }

  solarchan::NoiseModel noise() const { return {t_cmb_k, bandwidth_hz, kappa, constants::boltzmann}; }

  /// Boundaries actually used for gain classification.
  std::vector<double> thresholds() const {
    if (!gamma_omega.empty()) return gamma_omega;
    std::vector<double> t;
    for (std::size_t k = 1; k < state_omega.size(); ++k)
      t.push_back(std::sqrt(state_omega[k - 1] * state_omega[k]));
    return t;
  }

  std::vector<statechain::StateDef> state_defs(double rate_threshold = 2.0) const {
    const auto th = thresholds();
    std::vector<statechain::StateDef> defs(states());
    for (std::size_t k = 0; k < defs.size(); ++k) {
      defs[k].index = k;
      defs[k].label = state_labels[k];
      defs[k].channel.omega = state_omega[k];
      defs[k].gamma_threshold = k == 0 ? 0.0 : th[k - 1];
      defs[k].rate_threshold = rate_threshold;
    }
    return defs;
  }

  void validate() const;
};

inline void LinkConfig::validate() const {
  if (modulation != "4QAM") throw ConfigError("modulation must be 4QAM");
  if (n_samples < 10'000) throw ConfigError("n_samples must be >= 1e4");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (!(sample_period_s > 0.0)) throw ConfigError("sample_period_s must be > 0");
  if (!(t_cmb_k > 0.0)) throw ConfigError("t_cmb_k must be > 0");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  if (!(pathloss_exp > 0.0)) throw ConfigError("pathloss_exp must be > 0");
  if (!(s_csee_var >= 0.0)) throw ConfigError("s_csee_var must be >= 0");
  if (snr_db.empty()) throw ConfigError("snr_db range must be non-empty");
  try {
    geometry.validate();
    scint.validate();
    statechain::TransitionMatrix::validate(transition);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const std::size_t k = states();
  if (state_labels.size() != k) throw ConfigError("states.labels must have one entry per state");
  if (state_omega.size() != k) throw ConfigError("states.omega must have one entry per state");
  for (double o : state_omega)
    if (!(o > 0.0)) throw ConfigError("states.omega entries must be > 0");
  for (std::size_t i = 1; i < k; ++i)
    if (!(state_omega[i] > state_omega[i - 1])) throw ConfigError("states.omega must increase with state index");
  if (!gamma_omega.empty()) {
    if (gamma_omega.size() + 1 != k) throw ConfigError("states.gamma_omega must have K-1 entries");
    for (std::size_t i = 0; i < gamma_omega.size(); ++i)
      if (!(gamma_omega[i] > 0.0) || (i > 0 && !(gamma_omega[i] > gamma_omega[i - 1])))
        throw ConfigError("states.gamma_omega must be positive and strictly increasing");
  }
  if (priorities.size() != k) throw ConfigError("sbpa.priorities must have one entry per state");
  for (double p : priorities)
    if (!(p > 0.0)) throw ConfigError("sbpa.priorities must be > 0");
  if (!(rho_mw > 0.0)) throw ConfigError("sbpa.rho_mw must be > 0");
  if (samples_per_step == 0) throw ConfigError("markov.samples_per_step must be > 0");
  if (!(reference_speed_kms > 0.0)) throw ConfigError("markov.reference_speed_kms must be > 0");
  if (n_sinusoids < fadegen::min_sinusoids) throw ConfigError("sos.n_sinusoids must be >= 8");
  if (!(sweep_phi_step_deg > 0.0) || !(sweep_phi_max_deg >= sweep_phi_min_deg))
    throw ConfigError("sweep phi range must be non-empty with positive step");
  if (!(std::abs(sweep_phi_min_deg) < 90.0) || !(std::abs(sweep_phi_max_deg) < 90.0))
    throw ConfigError("sweep phi range must stay inside |phi| < 90");
}

// ---------------------------------------------------------------------------
// Results

struct SnrPoint {
  double snr_db = 0.0;
  double ber = 0.0;
  double ber_ci95 = 0.0;
  double op = 0.0;
  double capacity = 0.0;  ///< mean rate, bps/Hz
  std::uint64_t bits = 0;
  double bit_errors = 0.0;
};

struct LinkRunResult {
  std::string mode;     ///< "sbpa" or "conventional"
  std::string case_id;
  std::vector<SnrPoint> points;

  statechain::StateSequence state_series;   ///< true Markov states
  std::vector<std::uint32_t> estimated;     ///< transmitter's state per block
  std::vector<double> omega_series;         ///< measured block gain Omega(t)
  powalloc::SbpaPolicy policy;
  powalloc::AllocationResult alloc;
  std::vector<double> per_state_mean_rate;  ///< at the report SNR
  double mean_power_factor = 1.0;           ///< time-average alpha in the evaluation run

  std::vector<double> thresholds;
  KFactor gamma;
  double d_s_km = 0.0;
  double path_loss_db = 0.0;
  double f_dop_max_hz = 0.0;
  double f_los_hz = 0.0;
  double noise_power_w = 0.0;
  std::uint64_t samples_per_step = 0;
};

inline SnrPoint finish_point(double snr_db, std::uint64_t bits, double errors, std::uint64_t outages,
                             double rate_sum, std::uint64_t samples) {
  SnrPoint p;
  p.snr_db = snr_db;
  p.bits = bits;
  p.bit_errors = errors;
  p.ber = bits ? errors / static_cast<double>(bits) : 0.0;
  p.ber_ci95 = bits ? 1.96 * std::sqrt(p.ber * (1.0 - p.ber) / static_cast<double>(bits)) : 0.0;
  p.op = samples ? static_cast<double>(outages) / static_cast<double>(samples) : 0.0;
  p.capacity = samples ? rate_sum / static_cast<double>(samples) : 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Time-varying runs

/// Everything a time-varying run derives from (config, case) before drawing
/// random numbers.
struct CasePlan {
  orbitgeom::SepGeometry geometry;
  KFactor gamma;
  double f_dop_max_hz = 0.0;
  double f_los_hz = 0.0;
  double d_s_km = 0.0;
  double path_loss_db = 0.0;
  double noise_power_w = 0.0;
  statechain::TransitionMatrix chain;
  std::vector<statechain::StateDef> defs;
  std::vector<double> thresholds;
  std::uint64_t n_samples = 0;
  std::uint64_t step_samples = 0;
  std::size_t n_steps = 0;
  std::uint64_t case_tag = 0;
};

/// One Markov step per block of samples. The block length scales with
/// reference_speed / nu, so the chain steps at a rate proportional to the
/// maximum Doppler.
inline std::uint64_t step_samples_for(const LinkConfig& cfg, double nu_kms) {
  if (!(nu_kms > 0.0)) return cfg.samples_per_step;
  const double s = static_cast<double>(cfg.samples_per_step) * cfg.reference_speed_kms / nu_kms;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(s)));
}

inline CasePlan plan_case(const LinkConfig& cfg, const CaseSpec& cs) {
  cfg.validate();
  cs.validate(cfg.states());
  CasePlan p;
  p.geometry = cfg.geometry;
  p.geometry.nu_kms = cs.nu_kms;
  p.geometry.phi_deg = cs.phi_deg;
  p.gamma = cs.gamma ? *cs.gamma : solarchan::k_factor_at(cs.phi_deg, cfg.scint);
  p.f_dop_max_hz = orbitgeom::max_doppler(p.geometry);
  p.f_los_hz = orbitgeom::los_doppler(p.geometry, cfg.transverse);
  p.d_s_km = orbitgeom::distance_at_angle(p.geometry);
  p.path_loss_db = 32.45 + 20.0 * std::log10(p.geometry.carrier_hz / 1e6) +
                   10.0 * cfg.pathloss_exp * std::log10(p.d_s_km);
  p.noise_power_w = solarchan::thermal_noise_floor(cfg.noise());
  p.chain = statechain::TransitionMatrix::validate(cfg.transition);
  p.defs = cfg.state_defs(cs.rate_threshold);
  for (auto& d : p.defs) {
    d.channel.k_factor = p.gamma;
    d.channel.f_dop_hz = p.f_los_hz;
    d.channel.phi_deg = cs.phi_deg;
  }
  p.thresholds = cfg.thresholds();
  p.n_samples = static_cast<std::uint64_t>(std::llround(cs.tau_t_s / cfg.sample_period_s));
  if (p.n_samples == 0) throw ConfigError("case.tau_t_s is shorter than one sample");
  p.step_samples = step_samples_for(cfg, cs.nu_kms);
  p.n_steps = static_cast<std::size_t>((p.n_samples + p.step_samples - 1) / p.step_samples);
  p.case_tag = static_cast<std::uint64_t>(cs.id);
  return p;
}

namespace detail {

inline fadegen::SosConfig sos_config(const LinkConfig& cfg, const CasePlan& p, std::string_view label) {
  fadegen::SosConfig s;
  s.n_sinusoids = cfg.n_sinusoids;
  s.f_dop_max_hz = p.f_dop_max_hz;
  s.sample_period_s = cfg.sample_period_s;
  s.seed = derive_seed(cfg.seed, label, {p.case_tag});
  return s;
}

/// CIR of block n under the state sequence; returns the block's mean |h|^2.
inline double block_cir(const CasePlan& p, const fadegen::SosGenerator& gen,
                        const statechain::StateSequence& seq, std::size_t n, std::vector<cplx>& h) {
  const std::uint64_t first = n * p.step_samples;
  const std::uint64_t last = std::min(first + p.step_samples, p.n_samples);
  h.resize(last - first);
  fadegen::RicianChannelParams unit = p.defs[seq.states[n]].channel;
  unit.omega = 1.0;
  fadegen::rician_fill(unit, gen, first, h);
  const double a = std::sqrt(p.defs[seq.states[n]].channel.omega);
  double g = 0.0;
  for (auto& v : h) {
    v *= a;
    g += std::norm(v);
  }
  return g / static_cast<double>(h.size());
}

inline double block_duration(const CasePlan& p, std::size_t n, double ts) {
  const std::uint64_t first = n * p.step_samples;
  const std::uint64_t last = std::min(first + p.step_samples, p.n_samples);
  return static_cast<double>(last - first) * ts;
}

}  // namespace detail

struct StateTrace {
  statechain::StateSequence states;
  std::vector<std::uint32_t> classified;
  std::vector<double> omega;  ///< block-mean |h|^2
};

/// Markov sequence, per-block measured gain and its classification, without
/// running the link. `label` selects independent substreams (the SBPA
/// calibration pass uses its own).
inline StateTrace trace_states(const LinkConfig& cfg, const CasePlan& p, std::size_t initial,
                               const statechain::TransitionMatrix& chain,
                               std::string_view label = "eval") {
  StateTrace tr;
  const std::string lab(label);
  Rng markov = Rng::derive(cfg.seed, lab + "-markov", {p.case_tag});
  tr.states = statechain::generate_sequence(chain, initial, p.n_steps,
                                            static_cast<double>(p.step_samples) * cfg.sample_period_s, markov);
  // Dwell from actual block lengths (the last block may be short).
  tr.states.dwell.assign(chain.size(), 0.0);
  tr.states.total = 0.0;
  std::vector<double> block_dur(p.n_steps);
  for (std::size_t n = 0; n < p.n_steps; ++n) block_dur[n] = detail::block_duration(p, n, cfg.sample_period_s);
  for (std::size_t n = 0; n < p.n_steps; ++n) tr.states.dwell[tr.states.states[n]] += block_dur[n];
  for (double d : tr.states.dwell) tr.states.total += d;

  const fadegen::SosGenerator gen(detail::sos_config(cfg, p, lab + "-fading"));
  tr.omega.resize(p.n_steps);
  tr.classified.resize(p.n_steps);
  parallel_for(p.n_steps, cfg.workers, [&](std::size_t n) {
    std::vector<cplx> h;
    tr.omega[n] = detail::block_cir(p, gen, tr.states, n, h);
    tr.classified[n] = static_cast<std::uint32_t>(statechain::classify_gain(tr.omega[n], p.defs));
  });
  return tr;
}

/// Durations per classified state, for SBPA.
inline std::vector<double> classified_durations(const CasePlan& p, const StateTrace& tr, double ts) {
  std::vector<double> tau(p.defs.size(), 0.0);
  for (std::size_t n = 0; n < tr.classified.size(); ++n)
    tau[tr.classified[n]] += detail::block_duration(p, n, ts);
  return tau;
}

/// SBPA calibration: a separate run on the transmitter's (possibly
/// perturbed) estimate of the chain, classified from measured gain.
inline powalloc::SbpaPolicy calibrate_sbpa(const LinkConfig& cfg, const CasePlan& p, const CaseSpec& cs) {
  Rng est_rng = Rng::derive(cfg.seed, "scsee", {p.case_tag});
  const auto estimated = statechain::perturb(p.chain, cfg.s_csee_var, est_rng);
  const StateTrace cal = trace_states(cfg, p, cs.initial_state, estimated, "calibration");
  powalloc::SbpaPolicy pol;
  pol.priorities = cfg.priorities;
  pol.durations = classified_durations(p, cal, cfg.sample_period_s);
  pol.rho = cfg.rho_mw;
  return pol;
}

inline std::size_t nearest_index(std::span<const double> grid, double v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - v) < std::abs(grid[best] - v)) best = i;
  return best;
}

/// Time-varying experiment for one case. With use_sbpa the transmitter scales
/// power by alpha of its estimated state; otherwise power is uniform.
inline LinkRunResult run_time_varying(const LinkConfig& cfg, const CaseSpec& cs, bool use_sbpa) {
  const CasePlan p = plan_case(cfg, cs);
  const std::size_t k = p.defs.size();

  LinkRunResult res;
  res.mode = use_sbpa ? "sbpa" : "conventional";
  res.case_id = case_name(cs.id);
  res.thresholds = p.thresholds;
  res.gamma = p.gamma;
  res.d_s_km = p.d_s_km;
  res.path_loss_db = p.path_loss_db;
  res.f_dop_max_hz = p.f_dop_max_hz;
  res.f_los_hz = p.f_los_hz;
  res.noise_power_w = p.noise_power_w;
  res.samples_per_step = p.step_samples;

  if (use_sbpa) {
    res.policy = calibrate_sbpa(cfg, p, cs);
    res.alloc = powalloc::allocate(res.policy);
  } else {
    res.policy.priorities.assign(k, 1.0);
    res.policy.rho = cfg.rho_mw;
    res.alloc = powalloc::uniform(k);
  }

  StateTrace tr = trace_states(cfg, p, cs.initial_state, p.chain, "eval");
  res.policy.durations = use_sbpa ? res.policy.durations : classified_durations(p, tr, cfg.sample_period_s);
  res.alloc.power_dbm.resize(k);
  for (std::size_t s = 0; s < k; ++s) res.alloc.power_dbm[s] = powalloc::state_power_dbm(res.alloc.alpha[s], cfg.rho_mw);

  const std::size_t n_snr = cfg.snr_db.size();
  const std::size_t report = nearest_index(cfg.snr_db, cfg.report_snr_db);
  const double sigma2 = p.noise_power_w;
  const double kappa = cfg.kappa;

  struct Cell {
    double errors = 0.0;
    std::uint64_t outages = 0;
    double rate_sum = 0.0;
  };
  std::vector<Cell> cells(p.n_steps * n_snr);
  std::vector<double> state_rate_sum(p.n_steps, 0.0);

  const fadegen::SosGenerator gen(detail::sos_config(cfg, p, "eval-fading"));
  parallel_for(p.n_steps, cfg.workers, [&](std::size_t n) {
    std::vector<cplx> h;
    detail::block_cir(p, gen, tr.states, n, h);
    const double alpha = res.alloc.alpha[tr.classified[n]];
    for (std::size_t j = 0; j < n_snr; ++j) {
      const double rho = solarchan::db_to_linear(cfg.snr_db[j]) * sigma2 * alpha;
      const double g = std::sqrt(rho);
      Rng rng = Rng::derive(cfg.seed, "link", {p.case_tag, j, n});
      Cell c;
      for (const cplx& hi : h) {
        const std::uint64_t r = rng.next_u64();
        const unsigned b0 = (r >> 63) & 1u, b1 = (r >> 62) & 1u;
        const cplx y = transmit_sample(qam4_symbol(b0, b1), hi, rho, kappa, sigma2, rng);
        const double gain = std::norm(hi);
        if (std::sqrt(gain) < erasure_threshold) {
          c.errors += 1.0;
        } else {
          std::uint8_t d0, d1;
          qam4_slice(y / (g * hi), d0, d1);
          c.errors += (d0 != b0) + (d1 != b1);
        }
        const double rate = instantaneous_rate(rho, gain, kappa, sigma2);
        c.outages += rate < cs.rate_threshold;
        c.rate_sum += rate;
      }
      cells[n * n_snr + j] = c;
      if (j == report) state_rate_sum[n] = c.rate_sum;
    }
  });

  // Ordered reduction keeps results independent of the worker count.
  res.points.resize(n_snr);
  for (std::size_t j = 0; j < n_snr; ++j) {
    double errors = 0.0, rate_sum = 0.0;
    std::uint64_t outages = 0;
    for (std::size_t n = 0; n < p.n_steps; ++n) {
      const Cell& c = cells[n * n_snr + j];
      errors += c.errors;
      outages += c.outages;
      rate_sum += c.rate_sum;
    }
    res.points[j] = finish_point(cfg.snr_db[j], 2 * p.n_samples, errors, outages, rate_sum, p.n_samples);
  }

  std::vector<double> rate_by_state(k, 0.0), samples_by_state(k, 0.0);
  double alpha_time = 0.0;
  for (std::size_t n = 0; n < p.n_steps; ++n) {
    const double len = detail::block_duration(p, n, cfg.sample_period_s) / cfg.sample_period_s;
    rate_by_state[tr.classified[n]] += state_rate_sum[n];
    samples_by_state[tr.classified[n]] += len;
    alpha_time += res.alloc.alpha[tr.classified[n]] * len;
  }
  res.per_state_mean_rate.resize(k);
  for (std::size_t s = 0; s < k; ++s)
    res.per_state_mean_rate[s] = samples_by_state[s] > 0 ? rate_by_state[s] / samples_by_state[s] : 0.0;
  res.mean_power_factor = alpha_time / static_cast<double>(p.n_samples);

  res.state_series = std::move(tr.states);
  res.estimated = std::move(tr.classified);
  res.omega_series = std::move(tr.omega);
  return res;
}

// ---------------------------------------------------------------------------
// Angle sweep

struct SweepRow {
  double phi_deg = 0.0;
  double m = 0.0;
  KFactor gamma;
  double f_los_hz = 0.0;
  std::vector<SnrPoint> points;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double d_s_km = 0.0;   ///< at the sweep's D1 and phi = 0
  double path_loss_db = 0.0;
  double f_dop_max_hz = 0.0;
  double noise_power_w = 0.0;
};

inline std::vector<double> phi_grid(const LinkConfig& cfg) {
  std::vector<double> g;
  const double step = cfg.sweep_phi_step_deg;
  const auto n = static_cast<long>(std::floor((cfg.sweep_phi_max_deg - cfg.sweep_phi_min_deg) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(cfg.sweep_phi_min_deg + static_cast<double>(i) * step);
  return g;
}

/// Single-state BER/OP/capacity against the SEP angle. Every angle reuses the
/// same diffuse fading process and link substreams, so differences between
/// angles come from m(phi) alone.
inline SweepResult run_angle_sweep(const LinkConfig& cfg, double rate_threshold = 2.0) {
  cfg.validate();
  SweepResult out;
  const auto grid = phi_grid(cfg);
  orbitgeom::SepGeometry g0 = cfg.geometry;
  g0.phi_deg = 0.0;
  out.f_dop_max_hz = orbitgeom::max_doppler(g0);
  out.d_s_km = orbitgeom::distance_at_angle(g0);
  out.path_loss_db = 32.45 + 20.0 * std::log10(g0.carrier_hz / 1e6) + 10.0 * cfg.pathloss_exp * std::log10(out.d_s_km);
  out.noise_power_w = solarchan::thermal_noise_floor(cfg.noise());
  const double sigma2 = out.noise_power_w;

  fadegen::SosConfig sc;
  sc.n_sinusoids = cfg.n_sinusoids;
  sc.f_dop_max_hz = out.f_dop_max_hz;
  sc.sample_period_s = cfg.sample_period_s;
  sc.seed = derive_seed(cfg.seed, "sweep-fading");
  const fadegen::SosGenerator gen(sc);

  constexpr std::uint64_t block = 1000;
  const std::uint64_t n_samples = cfg.n_samples;
  const std::size_t n_blocks = static_cast<std::size_t>((n_samples + block - 1) / block);
  const std::size_t n_snr = cfg.snr_db.size();

  for (double phi : grid) {
    SweepRow row;
    row.phi_deg = phi;
    row.m = solarchan::scintillation_index(phi, cfg.scint);
    row.gamma = solarchan::k_factor_from_m(row.m);
    orbitgeom::SepGeometry g = cfg.geometry;
    g.phi_deg = phi;
    row.f_los_hz = orbitgeom::los_doppler(g, cfg.transverse);
    fadegen::RicianChannelParams ch{1.0, row.gamma, row.f_los_hz, phi};

    struct Cell {
      double errors = 0.0;
      std::uint64_t outages = 0;
      double rate_sum = 0.0;
    };
    std::vector<Cell> cells(n_blocks * n_snr);
    parallel_for(n_blocks, cfg.workers, [&](std::size_t b) {
      const std::uint64_t first = b * block;
      std::vector<cplx> h(std::min(block, n_samples - first));
      fadegen::rician_fill(ch, gen, first, h);
      for (std::size_t j = 0; j < n_snr; ++j) {
        const double rho = solarchan::db_to_linear(cfg.snr_db[j]) * sigma2;
        const double gr = std::sqrt(rho);
        Rng rng = Rng::derive(cfg.seed, "sweep", {j, b});
        Cell c;
        for (const cplx& hi : h) {
          const std::uint64_t r = rng.next_u64();
          const unsigned b0 = (r >> 63) & 1u, b1 = (r >> 62) & 1u;
          const cplx y = transmit_sample(qam4_symbol(b0, b1), hi, rho, cfg.kappa, sigma2, rng);
          const double gain = std::norm(hi);
          if (std::sqrt(gain) < erasure_threshold) {
            c.errors += 1.0;
          } else {
            std::uint8_t d0, d1;
            qam4_slice(y / (gr * hi), d0, d1);
            c.errors += (d0 != b0) + (d1 != b1);
          }
          const double rate = instantaneous_rate(rho, gain, cfg.kappa, sigma2);
          c.outages += rate < rate_threshold;
          c.rate_sum += rate;
        }
        cells[b * n_snr + j] = c;
      }
    });
    row.points.resize(n_snr);
    for (std::size_t j = 0; j < n_snr; ++j) {
      double errors = 0.0, rate_sum = 0.0;
      std::uint64_t outages = 0;
      for (std::size_t b = 0; b < n_blocks; ++b) {
        errors += cells[b * n_snr + j].errors;
        outages += cells[b * n_snr + j].outages;
        rate_sum += cells[b * n_snr + j].rate_sum;
      }
      row.points[j] = finish_point(cfg.snr_db[j], 2 * n_samples, errors, outages, rate_sum, n_samples);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_metadata(std::ostream& os, std::span<const std::string> lines) {
  for (const auto& l : lines) os << "# " << l << '\n';
}

/// snr_db,ber,ber_ci95,op,capacity_bps_hz,mode,case_id
inline void write_results_csv(std::ostream& os, std::span<const LinkRunResult> runs) {
  os << "snr_db,ber,ber_ci95,op,capacity_bps_hz,mode,case_id\n";
  char buf[256];
  for (const auto& r : runs)
    for (const auto& p : r.points) {
      std::snprintf(buf, sizeof buf, "%.6g,%.9g,%.9g,%.9g,%.9g,%s,%s\n", p.snr_db, p.ber, p.ber_ci95, p.op,
                    p.capacity, r.mode.c_str(), r.case_id.c_str());
      os << buf;
    }
}

/// phi_deg,m,gamma,snr_db,ber,ber_ci95,op,capacity_bps_hz,mode,case_id
inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << "phi_deg,m,gamma,snr_db,ber,ber_ci95,op,capacity_bps_hz,mode,case_id\n";
  char buf[320];
  for (const auto& row : s.rows)
    for (const auto& p : row.points) {
      std::snprintf(buf, sizeof buf, "%.6g,%.9g,%s,%.6g,%.9g,%.9g,%.9g,%.9g,conventional,angle_sweep\n",
                    row.phi_deg, row.m, row.gamma.to_string().c_str(), p.snr_db, p.ber, p.ber_ci95, p.op,
                    p.capacity);
      os << buf;
    }
}

}  // namespace islchan::sim
