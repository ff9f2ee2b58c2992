#pragma once

// Rician fading generation.
//
// Diffuse scattering comes from a sum-of-sinusoids (SoS) model: each of the
// two quadratures is
//
//   z_i(t) = sqrt(2/N) * sum_n cos(2 pi fD t cos(theta_n) + psi_n),
//   theta_n = (2 pi n - pi + phi_i) / (4N),   n = 1..N
//
// with phi_i uniform on [-pi, pi) and psi_n uniform on (0, 2pi], drawn once
// per generator. Each quadrature has unit power, so z = (z_1 + j z_2)/sqrt(2)
// has E|z|^2 = 1 and autocorrelation J0(2 pi fD tau).
//
// A windowed FIR shaping filter for white Gaussian noise is provided as a
// second generator with the same target spectrum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "islchan/constants.hpp"
#include "islchan/errors.hpp"
#include "islchan/rng.hpp"
#include "islchan/solarchan.hpp"

namespace islchan::fadegen {

using cplx = std::complex<double>;

inline constexpr int min_sinusoids = 8;
inline constexpr int default_sinusoids = 32;

struct SosConfig {
  int n_sinusoids = default_sinusoids;
  double f_dop_max_hz = 0.0;
  double sample_period_s = 1e-5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_sinusoids < min_sinusoids)
      throw DomainError("SosConfig: n_sinusoids must be >= " + std::to_string(min_sinusoids));
    if (!(sample_period_s > 0.0)) throw DomainError("SosConfig: sample_period_s must be > 0");
    if (!(f_dop_max_hz >= 0.0)) throw DomainError("SosConfig: f_dop_max_hz must be >= 0");
  }
};

/// One real SoS waveform: sqrt(2/N) * sum_n cos(2 pi f_n t + psi_n).
class SosQuadrature {
public:
  SosQuadrature() = default;
  SosQuadrature(std::vector<double> freq_hz, std::vector<double> phase_rad)
      : freq_(std::move(freq_hz)), phase_(std::move(phase_rad)) {
    if (freq_.empty() || freq_.size() != phase_.size())
      throw DomainError("SosQuadrature: need matching, non-empty frequency and phase lists");
    scale_ = std::sqrt(2.0 / static_cast<double>(freq_.size()));
  }

  std::size_t size() const noexcept { return freq_.size(); }
  std::span<const double> frequencies() const noexcept { return freq_; }
  std::span<const double> phases() const noexcept { return phase_; }

  double operator()(double t) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < freq_.size(); ++n)
      acc += std::cos(constants::two_pi * freq_[n] * t + phase_[n]);
    return scale_ * acc;
  }

  /// Adds `weight * z(i * dt)` for i in [first, first + out.size()) into out.
  /// Phasors are re-anchored exactly every `anchor_stride` absolute indices, so
  /// sample i depends on i alone, whatever range it was requested in.
  void accumulate(std::uint64_t first, double dt, double weight, std::span<double> out) const;

  static constexpr std::uint64_t anchor_stride = 64;

private:
  std::vector<double> freq_;
  std::vector<double> phase_;
  double scale_ = 0.0;
};

inline void SosQuadrature::accumulate(std::uint64_t first, double dt, double weight,
                                      std::span<double> out) const {
  const std::uint64_t last = first + out.size();
  const double w = weight * scale_;
  std::uint64_t anchor = first - first % anchor_stride;
  for (; anchor < last; anchor += anchor_stride) {
    const std::uint64_t lo = std::max(anchor, first);
    const std::uint64_t hi = std::min(anchor + anchor_stride, last);
    for (std::size_t n = 0; n < freq_.size(); ++n) {
      const double omega_dt = constants::two_pi * freq_[n] * dt;
      const cplx step = std::polar(1.0, omega_dt);
      cplx p = std::polar(1.0, omega_dt * static_cast<double>(anchor) + phase_[n]);
      for (std::uint64_t i = anchor; i < lo; ++i) p *= step;
      double* dst = out.data() + (lo - first);
      for (std::uint64_t i = lo; i < hi; ++i) {
        *dst++ += w * p.real();
        p *= step;
      }
    }
  }
}

/// Complex unit-power SoS process z(t) = (z_1 + j z_2)/sqrt(2).
class SosGenerator {
public:
  explicit SosGenerator(const SosConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(derive_seed(cfg.seed, "sos"));
    quad_[0] = draw(rng);
    quad_[1] = draw(rng);
  }

  const SosConfig& config() const noexcept { return cfg_; }

  /// One quadrature waveform z^(i)(t), i in {1, 2}.
  double waveform(double t, int quad_index) const {
    if (quad_index != 1 && quad_index != 2) throw DomainError("quadrature index must be 1 or 2");
    return quad_[quad_index - 1](t);
  }

  const SosQuadrature& quadrature(int quad_index) const {
    if (quad_index != 1 && quad_index != 2) throw DomainError("quadrature index must be 1 or 2");
    return quad_[quad_index - 1];
  }

  cplx operator()(double t) const {
    return cplx(quad_[0](t), quad_[1](t)) * inv_sqrt2;
  }

  /// z at sample indices [first, first + out.size()), t = i * T_s.
  void fill(std::uint64_t first, std::span<cplx> out) const {
    std::vector<double> re(out.size(), 0.0), im(out.size(), 0.0);
    quad_[0].accumulate(first, cfg_.sample_period_s, inv_sqrt2, re);
    quad_[1].accumulate(first, cfg_.sample_period_s, inv_sqrt2, im);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {re[i], im[i]};
  }

private:
  static constexpr double inv_sqrt2 = 0.70710678118654752440;

  SosQuadrature draw(Rng& rng) const {
    const int n = cfg_.n_sinusoids;
    const double offset = constants::two_pi * rng.uniform() - constants::pi;
    std::vector<double> f(n), psi(n);
    for (int k = 0; k < n; ++k) {
      const double theta = (constants::two_pi * (k + 1) - constants::pi + offset) / (4.0 * n);
      f[k] = cfg_.f_dop_max_hz * std::cos(theta);
      psi[k] = constants::two_pi * rng.uniform_open0();
    }
    return SosQuadrature(std::move(f), std::move(psi));
  }

  SosConfig cfg_;
  SosQuadrature quad_[2];
};

struct RicianChannelParams {
  double omega = 1.0;         ///< mean path gain E|h|^2, linear
  KFactor k_factor{0.0};
  double f_dop_hz = 0.0;      ///< LoS Doppler offset
  double phi_deg = 0.0;

  void validate() const {
    if (!(omega > 0.0)) throw DomainError("RicianChannelParams: omega must be > 0");
    if (!k_factor.is_infinite() && !(k_factor.value() >= 0.0))
      throw DomainError("RicianChannelParams: K-factor must be >= 0");
  }
};

/// h(t) = sqrt(Omega) * ( z(t)/sqrt(K+1) + sqrt(K/(K+1)) e^{j 2 pi f t} ).
/// With K infinite only the LoS ray remains.
inline cplx rician_cir(const RicianChannelParams& p, const SosGenerator& gen, double t) {
  const cplx los = std::polar(std::sqrt(p.k_factor.los_fraction()),
                              constants::two_pi * p.f_dop_hz * t);
  if (p.k_factor.is_infinite()) return std::sqrt(p.omega) * los;
  return std::sqrt(p.omega) * (gen(t) * std::sqrt(p.k_factor.diffuse_fraction()) + los);
}

/// Sampled Rician CIR at indices [first, first + out.size()).
inline void rician_fill(const RicianChannelParams& p, const SosGenerator& gen, std::uint64_t first,
                        std::span<cplx> out) {
  const double dt = gen.config().sample_period_s;
  const double amp = std::sqrt(p.omega);
  const double los_amp = amp * std::sqrt(p.k_factor.los_fraction());
  if (p.k_factor.is_infinite()) {
    std::fill(out.begin(), out.end(), cplx{});
  } else {
    gen.fill(first, out);
    const double d = amp * std::sqrt(p.k_factor.diffuse_fraction());
    for (auto& v : out) v *= d;
  }
  if (los_amp == 0.0) return;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(first + i) * dt;
    out[i] += std::polar(los_amp, constants::two_pi * p.f_dop_hz * t);
  }
}

/// Stateful Rician process bound to one SoS generator.
class RicianFading {
public:
  RicianFading(RicianChannelParams params, const SosConfig& cfg)
      : params_(params), gen_(cfg) {
    params_.validate();
  }

  const RicianChannelParams& params() const noexcept { return params_; }
  const SosGenerator& generator() const noexcept { return gen_; }

  cplx operator()(double t) const { return rician_cir(params_, gen_, t); }
  void fill(std::uint64_t first, std::span<cplx> out) const { rician_fill(params_, gen_, first, out); }

private:
  RicianChannelParams params_;
  SosGenerator gen_;
};

// ---------------------------------------------------------------------------
// Band-limited FIR channel

/// Normalized sinc, sin(pi x)/(pi x).
inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = constants::pi * x;
  return std::sin(px) / px;
}

struct FirChannel {
  /// Either one coefficient shared by every tap (flat single-path channel) or
  /// n1 + n2 + 1 coefficients for n = -n1..n2.
  std::vector<cplx> taps{cplx{1.0, 0.0}};
  double path_delay_s = 0.0;
  double sample_period_s = 1e-5;
  int n1 = 8;
  int n2 = 8;

  void validate() const {
    if (taps.empty()) throw DomainError("FirChannel: at least one tap required");
    if (n1 < 0 || n2 < 0) throw DomainError("FirChannel: window bounds must be >= 0");
    if (taps.size() != 1 && taps.size() != static_cast<std::size_t>(n1 + n2 + 1))
      throw DomainError("FirChannel: taps must be 1 or n1 + n2 + 1 long");
    if (!(sample_period_s > 0.0)) throw DomainError("FirChannel: sample_period_s must be > 0");
  }

  cplx tap(int n) const { return taps.size() == 1 ? taps[0] : taps[static_cast<std::size_t>(n + n1)]; }
};

/// y_i = sum_{n=-n1}^{n2} s_{i-n} h_n sinc(tau_p / T_s - n).
inline cplx fir_apply(const FirChannel& ch, std::span<const cplx> s, std::size_t i) {
  ch.validate();
  const auto ii = static_cast<std::int64_t>(i);
  if (ii - ch.n2 < 0 || ii + ch.n1 >= static_cast<std::int64_t>(s.size()))
    throw std::out_of_range("fir_apply: stream does not cover [i - n2, i + n1]");
  const double frac = ch.path_delay_s / ch.sample_period_s;
  cplx y{};
  for (int n = -ch.n1; n <= ch.n2; ++n)
    y += s[static_cast<std::size_t>(ii - n)] * ch.tap(n) * sinc(frac - n);
  return y;
}

// ---------------------------------------------------------------------------
// Doppler shaping filter

/// Real FIR taps whose magnitude response follows sqrt(S(f)) of the Jakes
/// spectrum, Hamming-windowed and scaled to unit energy. White noise of power
/// P filtered through them keeps power P and gains autocorrelation close to
/// J0(2 pi fD tau).
inline std::vector<double> doppler_filter_taps(double f_dop_max_hz, double sample_period_s,
                                               std::size_t n_taps) {
  if (!(sample_period_s > 0.0)) throw DomainError("doppler_filter_taps: sample period must be > 0");
  if (!(f_dop_max_hz >= 0.0)) throw DomainError("doppler_filter_taps: f_dop_max must be >= 0");
  if (!(f_dop_max_hz < 0.5 / sample_period_s))
    throw DomainError("doppler_filter_taps: f_dop_max must be below Nyquist 1/(2 T_s)");
  if (n_taps == 0) throw DomainError("doppler_filter_taps: n_taps must be >= 1");
  if (f_dop_max_hz == 0.0 || n_taps == 1) return {1.0};

  // Impulse response of sqrt(Jakes): J_{1/4}(2 pi fD |t|) / |t|^{1/4}; the
  // constant scale is irrelevant after normalization.
  const double w = constants::two_pi * f_dop_max_hz;
  const double centre = 0.5 * static_cast<double>(n_taps - 1);
  const double at_zero = std::pow(0.5 * w, 0.25) / std::tgamma(1.25);
  std::vector<double> g(n_taps);
  double energy = 0.0;
  for (std::size_t k = 0; k < n_taps; ++k) {
    const double t = (static_cast<double>(k) - centre) * sample_period_s;
    const double at = std::abs(t);
    double v = at < 1e-15 ? at_zero : std::cyl_bessel_j(0.25, w * at) / std::pow(at, 0.25);
    const double hamming =
        0.54 - 0.46 * std::cos(constants::two_pi * static_cast<double>(k) / static_cast<double>(n_taps - 1));
    v *= hamming;
    g[k] = v;
    energy += v * v;
  }
  const double s = 1.0 / std::sqrt(energy);
  for (auto& v : g) v *= s;
  return g;
}

/// Complex Gaussian samples of power `power` shaped by `taps`.
inline std::vector<cplx> filtered_gaussian(std::span<const double> taps, std::size_t n, double power,
                                           Rng& rng) {
  const std::size_t m = taps.size();
  std::vector<cplx> white(n + m - 1);
  for (auto& v : white) v = rng.complex_normal(power);
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc{};
    for (std::size_t k = 0; k < m; ++k) acc += taps[k] * white[i + m - 1 - k];
    out[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Waveform dumps

/// Little-endian interleaved complex64 (float32 re, float32 im).
inline void write_complex64_le(std::ostream& os, std::span<const cplx> samples) {
  auto put = [&os](float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    const unsigned char b[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                                static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  for (const auto& v : samples) {
    put(static_cast<float>(v.real()));
    put(static_cast<float>(v.imag()));
  }
}

/// CSV with columns t_s,re,im,abs.
inline void write_waveform_csv(std::ostream& os, std::span<const cplx> samples, double t0_s,
                               double sample_period_s) {
  os << "t_s,re,im,abs\n";
  char buf[128];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& v = samples[i];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n",
                  t0_s + static_cast<double>(i) * sample_period_s, v.real(), v.imag(), std::abs(v));
    os << buf;
  }
}

}  // namespace islchan::fadegen
