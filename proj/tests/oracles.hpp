#pragma once

// Reference formulas used by the tests. They are written independently of the
// library code: closed forms, numeric integration, or Eigen linear algebra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Uncoded QPSK over AWGN, per bit.
inline double qpsk_awgn_ber(double ebn0_db) { return qfunc(std::sqrt(2.0 * std::pow(10.0, ebn0_db / 10.0))); }

/// QPSK over flat Rayleigh with mean Eb/N0 g.
inline double qpsk_rayleigh_ber(double ebn0_db) {
  const double g = std::pow(10.0, ebn0_db / 10.0);
  return 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
}

/// Rayleigh outage: P(log2(1 + snr |h|^2) < rate).
inline double rayleigh_outage(double snr_lin, double rate) {
  return 1.0 - std::exp(-(std::pow(2.0, rate) - 1.0) / snr_lin);
}

/// Kolmogorov-Smirnov distance between |h| samples and the Rice law with unit
/// mean power and K-factor k. The CDF is tabulated by Simpson integration of
/// the density.
inline double rice_ks(std::vector<double> r, double k) {
  std::sort(r.begin(), r.end());
  const double nu = std::sqrt(k / (k + 1.0));
  const double s2 = 0.5 / (k + 1.0);
  auto pdf = [&](double x) {
    const double a = x * nu / s2;
    return x / s2 * std::exp(-(x - nu) * (x - nu) / (2.0 * s2)) * std::cyl_bessel_i(0.0, a) * std::exp(-a);
  };
  const int g = 200000;
  const double rmax = r.back() * 1.01;
  const double dr = rmax / g;
  std::vector<double> cdf(g + 1, 0.0);
  for (int i = 1; i <= g; ++i) {
    const double x0 = (i - 1) * dr, x1 = i * dr;
    cdf[i] = cdf[i - 1] + dr / 6.0 * (pdf(x0) + 4.0 * pdf(0.5 * (x0 + x1)) + pdf(x1));
  }
  const double n = static_cast<double>(r.size());
  double d = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = r[i] / dr;
    const int j = static_cast<int>(x);
    const double fr = x - j;
    const double f = cdf[j] * (1.0 - fr) + cdf[std::min(j + 1, g)] * fr;
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

/// Normalized autocorrelation of a complex series at lag.
inline double autocorr(const std::vector<std::complex<double>>& z, std::size_t lag) {
  std::complex<double> acc{};
  for (std::size_t i = 0; i + lag < z.size(); ++i) acc += z[i + lag] * std::conj(z[i]);
  return (acc / static_cast<double>(z.size() - lag)).real();
}

/// Stationary distribution via a least-squares solve of [P^T - I; 1^T] pi = e.
inline std::vector<double> stationary(const std::vector<std::vector<double>>& p) {
  const auto k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a(k + 1, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = p[j][i] - (i == j ? 1.0 : 0.0);
  a.row(k).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
  b(k) = 1.0;
  const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  return {pi.data(), pi.data() + k};
}

}  // namespace oracle
