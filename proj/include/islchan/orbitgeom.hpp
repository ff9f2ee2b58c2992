#pragma once

// Inter-satellite geometry and Doppler.
//
// Angles cross the API in degrees and are converted to radians internally.
// Speeds are km/s at the API, m/s inside the Doppler expressions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "islchan/constants.hpp"
#include "islchan/errors.hpp"

namespace islchan::orbitgeom {

struct SepGeometry {
  double phi_deg = 0.0;        ///< Sun-Earth-Probe angle
  double d1_km = 60.0;         ///< closest-approach distance
  double nu_kms = 2.0;         ///< relative speed |v12| = |v21|
  double carrier_hz = 10e9;    ///< emitted frequency f_S1
  double elevation_deg = 0.0;  ///< carried for completeness, always 0 in the presets

  void validate() const {
    if (!(d1_km > 0.0)) throw DomainError("SepGeometry: d1_km must be > 0");
    if (!(carrier_hz > 0.0)) throw DomainError("SepGeometry: carrier_hz must be > 0");
    if (!(nu_kms >= 0.0)) throw DomainError("SepGeometry: nu_kms must be >= 0");
    if (!(std::abs(phi_deg) < 90.0)) throw DomainError("SepGeometry: |phi_deg| must be < 90");
  }
};

/// Which half of the pass the observer is in. Approach is t0 <= t < t1,
/// recession t1 <= t <= t2, with t1 the moment of closest approach.
enum class Passage { approach, recession };

inline Passage passage_at(double t_s, double t_closest_s) noexcept {
  return t_s < t_closest_s ? Passage::approach : Passage::recession;
}

/// How the angular (transverse) Doppler term is formed.
///  - consistent: v * cos(pi/2 - phi), a velocity projection
///  - literal:    v^2 * cos(pi/2 - phi) with v in m/s, the printed form, which
///                is not dimensionally a velocity
enum class TransverseModel { consistent, literal };

inline std::string to_string(TransverseModel m) {
  return m == TransverseModel::literal ? "literal" : "consistent";
}

inline TransverseModel transverse_model_from_string(const std::string& s) {
  if (s == "consistent") return TransverseModel::consistent;
  if (s == "literal") return TransverseModel::literal;
  throw DomainError("unknown transverse Doppler model '" + s + "'");
}

/// Link distance D_s = D_1 / cos(phi).
inline double distance_at_angle(const SepGeometry& g) {
  if (!(std::abs(g.phi_deg) < 90.0)) throw DomainError("distance_at_angle: |phi| must be < 90 deg");
  return g.d1_km / std::cos(constants::deg_to_rad(g.phi_deg));
}

namespace detail {

inline double shifted(double f, double v_ms, Passage p) {
  constexpr double c = constants::speed_of_light;
  if (!(v_ms < c)) throw DomainError("observed frequency: relative speed must be below c");
  return p == Passage::approach ? f * (c / (c - v_ms)) : f * (c / (c + v_ms));
}

}  // namespace detail

/// Frequency seen by a stationary receiver for a source moving at nu.
inline double observed_frequency(const SepGeometry& g, Passage p) {
  return detail::shifted(g.carrier_hz, g.nu_kms * 1e3, p);
}

inline double observed_frequency(const SepGeometry& g, double t_s, double t_closest_s) {
  return observed_frequency(g, passage_at(t_s, t_closest_s));
}

/// Observed frequency with the velocity replaced by its angular projection.
/// At phi = 0 the projection vanishes and the carrier is returned unchanged.
inline double transverse_observed_frequency(const SepGeometry& g, Passage p,
                                            TransverseModel model = TransverseModel::consistent) {
  const double v = g.nu_kms * 1e3;
  const double proj = std::cos(constants::pi / 2.0 - constants::deg_to_rad(g.phi_deg));
  const double eff = (model == TransverseModel::literal ? v * v : v) * proj;
  return detail::shifted(g.carrier_hz, eff, p);
}

inline double transverse_observed_frequency(const SepGeometry& g, double t_s, double t_closest_s,
                                            TransverseModel model = TransverseModel::consistent) {
  return transverse_observed_frequency(g, passage_at(t_s, t_closest_s), model);
}

/// f_Dop^Max = nu * f / c.
inline double max_doppler(const SepGeometry& g) {
  return g.nu_kms * 1e3 * g.carrier_hz / constants::speed_of_light;
}

/// Classical U-shaped Jakes spectrum, normalized so S(0) = 1.
inline double jakes_psd(double f_hz, double f_dop_max_hz) {
  if (!(std::abs(f_hz) < f_dop_max_hz))
    throw DomainError("jakes_psd: |f| must be strictly below f_dop_max");
  const double r = f_hz / f_dop_max_hz;
  return 1.0 / std::sqrt(1.0 - r * r);
}

struct DopplerSpec {
  double f_dop_max_hz = 0.0;
  double f_dop_min_hz = 0.0;  ///< LoS offset of the angular term during approach
  std::function<double(double)> psd;
};

/// Doppler bounds for a geometry. The minimum is the residual angular shift of
/// the LoS component, which is what remains at closest approach.
inline DopplerSpec doppler_spec(const SepGeometry& g,
                                TransverseModel model = TransverseModel::consistent) {
  DopplerSpec d;
  d.f_dop_max_hz = max_doppler(g);
  const double los = transverse_observed_frequency(g, Passage::approach, model) - g.carrier_hz;
  d.f_dop_min_hz = std::min(std::abs(los), d.f_dop_max_hz);
  const double fmax = d.f_dop_max_hz;
  d.psd = [fmax](double f) { return jakes_psd(f, fmax); };
  return d;
}

/// Doppler offset of the LoS ray, f_Dop,phi, used by the Rician CIR.
inline double los_doppler(const SepGeometry& g,
                          TransverseModel model = TransverseModel::consistent) {
  return transverse_observed_frequency(g, Passage::approach, model) - g.carrier_hz;
}

}  // namespace islchan::orbitgeom
