#pragma once

// Solar scintillation and link budget.
//
// The scintillation index m falls off exponentially once the line of sight
// leaves the knee angle theta0 around the Sun line, and maps to a Rician
// K-factor. The deterministic budget terms (free-space loss, CMB noise floor)
// live here as well.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "islchan/constants.hpp"
#include "islchan/errors.hpp"

namespace islchan {

/// Rician K-factor (LoS power over diffuse power, linear). Pure line of sight
/// is a distinct state rather than a large number, so fading code can take the
/// deterministic path.
class KFactor {
public:
  constexpr KFactor() = default;
  constexpr explicit KFactor(double k) : value_(k) {}

  static constexpr KFactor infinite() noexcept {
    KFactor k;
    k.value_.reset();
    return k;
  }

  constexpr bool is_infinite() const noexcept { return !value_.has_value(); }

  /// Linear value; +inf for the pure-LoS state.
  constexpr double value() const noexcept {
    return value_ ? *value_ : std::numeric_limits<double>::infinity();
  }

  /// Fraction of power in the LoS ray, K/(K+1).
  double los_fraction() const noexcept { return value_ ? *value_ / (*value_ + 1.0) : 1.0; }

  /// Fraction of power in the diffuse part, 1/(K+1).
  double diffuse_fraction() const noexcept { return value_ ? 1.0 / (*value_ + 1.0) : 0.0; }

  friend constexpr bool operator==(const KFactor& a, const KFactor& b) noexcept {
    return a.value_ == b.value_;
  }

  std::string to_string() const {
    if (is_infinite()) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", *value_);
    return buf;
  }

private:
  std::optional<double> value_ = 0.0;
};

inline constexpr KFactor INFINITE_K = KFactor::infinite();

namespace solarchan {

struct ScintillationParams {
  double a1 = 1.14;          ///< decay coefficient, +-0.09
  double a2 = 0.02;          ///< correction coefficient, +-0.02
  double theta0_deg = 1.3;   ///< knee angle, stored as a magnitude
  double xi_deg = 3.0;       ///< half-width of the affected band

  static constexpr double a1_sigma = 0.09;
  static constexpr double a2_sigma = 0.02;

  void validate() const {
    if (!(a1 > a2)) throw DomainError("ScintillationParams: a1 must exceed a2");
    if (!(a2 >= 0.0)) throw DomainError("ScintillationParams: a2 must be >= 0");
    if (!(theta0_deg > 0.0)) throw DomainError("ScintillationParams: theta0_deg must be > 0");
    if (!(xi_deg > 0.0)) throw DomainError("ScintillationParams: xi_deg must be > 0");
  }
};

/// m(phi): 1 inside the knee, exp(-(a1 - a2)(|phi| - theta0)) outside.
inline double scintillation_index(double phi_deg, const ScintillationParams& p) {
  const double off = std::abs(phi_deg) - p.theta0_deg;
  if (off <= 0.0) return 1.0;
  const double m = std::exp(-(p.a1 - p.a2) * off);
  return std::clamp(m, 0.0, 1.0);
}

/// gamma = sqrt(1 - m^2) / (1 - sqrt(1 - m^2)), evaluated without the
/// cancellation in the denominator.
inline KFactor k_factor_from_m(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw DomainError("k_factor_from_m: m must lie in [0, 1]");
  if (m == 0.0) return INFINITE_K;
  const double s = std::sqrt((1.0 - m) * (1.0 + m));
  return KFactor(s * (1.0 + s) / (m * m));
}

/// Inverse of k_factor_from_m.
inline double m_from_k_factor(KFactor k) {
  if (k.is_infinite()) return 0.0;
  if (!(k.value() >= 0.0)) throw DomainError("m_from_k_factor: K must be >= 0");
  const double r = k.value() / (1.0 + k.value());
  return std::sqrt((1.0 - r) * (1.0 + r));
}

inline KFactor k_factor_at(double phi_deg, const ScintillationParams& p) {
  return k_factor_from_m(scintillation_index(phi_deg, p));
}

/// Decay difference a1 - a2 that puts K(phi) exactly on `target`.
inline double decay_for_k_factor(double phi_deg, KFactor target, double theta0_deg) {
  const double off = std::abs(phi_deg) - theta0_deg;
  if (!(off > 0.0)) throw DomainError("decay_for_k_factor: phi must lie outside the knee");
  const double m = m_from_k_factor(target);
  if (!(m > 0.0 && m < 1.0)) throw DomainError("decay_for_k_factor: target must be finite and > 0");
  return -std::log(m) / off;
}

/// Free-space path loss in dB, f in MHz and d in km.
inline double free_space_path_loss(double f_mhz, double d_km) {
  if (!(f_mhz > 0.0) || !(d_km > 0.0))
    throw DomainError("free_space_path_loss: frequency and distance must be positive");
  return 32.45 + 20.0 * std::log10(f_mhz) + 20.0 * std::log10(d_km);
}

struct NoiseModel {
  double t_cmb_k = constants::cmb_temperature;
  double bandwidth_hz = 1e6;
  double kappa = 0.05;  ///< hardware distortion level
  double boltzmann = constants::boltzmann;

  void validate() const {
    if (!(t_cmb_k > 0.0)) throw DomainError("NoiseModel: t_cmb_k must be > 0");
    if (!(bandwidth_hz > 0.0)) throw DomainError("NoiseModel: bandwidth_hz must be > 0");
    if (!(kappa >= 0.0)) throw DomainError("NoiseModel: kappa must be >= 0");
  }
};

/// k_B T_C B, watts.
inline double thermal_noise_floor(const NoiseModel& n) {
  return n.boltzmann * n.t_cmb_k * n.bandwidth_hz;
}

inline double watts_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace solarchan
}  // namespace islchan
