#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "islchan/fadegen.hpp"
#include "oracles.hpp"

using namespace islchan;
using namespace islchan::fadegen;

namespace {

SosConfig cfg(double fd, std::uint64_t seed = 11) {
  SosConfig c;
  c.f_dop_max_hz = fd;
  c.sample_period_s = 1e-5;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Sos, SingleSinusoidIsPureTone) {
  SosQuadrature q({100.0}, {0.3});
  for (double t : {0.0, 1e-3, 2.5e-3}) EXPECT_NEAR(q(t), std::sqrt(2.0) * std::cos(2 * constants::pi * 100.0 * t + 0.3), 1e-12);
}

TEST(Sos, RejectsTooFewSinusoids) {
  auto c = cfg(100.0);
  c.n_sinusoids = 4;
  EXPECT_THROW(SosGenerator{c}, DomainError);
  c = cfg(-1.0);
  EXPECT_THROW(SosGenerator{c}, DomainError);
}

TEST(Sos, FrequenciesInsideDopplerBand) {
  const SosGenerator g(cfg(1000.0));
  for (int q : {1, 2})
    for (double f : g.quadrature(q).frequencies()) {
      EXPECT_GT(f, 0.0);
      EXPECT_LE(f, 1000.0);
    }
  EXPECT_EQ(g.quadrature(1).size(), 32u);
  EXPECT_THROW(g.waveform(0.0, 3), DomainError);
}

TEST(Sos, ZeroDopplerIsConstant) {
  const SosGenerator g(cfg(0.0));
  std::vector<cplx> z(500);
  g.fill(0, z);
  for (const auto& v : z) EXPECT_NEAR(std::abs(v - z[0]), 0.0, 1e-12);
}

TEST(Sos, FillMatchesDirectEvaluation) {
  const SosGenerator g(cfg(5000.0));
  std::vector<cplx> z(300);
  g.fill(1000, z);
  for (std::size_t i = 0; i < z.size(); i += 17) {
    const cplx d = g((1000.0 + static_cast<double>(i)) * 1e-5);
    EXPECT_NEAR(std::abs(z[i] - d), 0.0, 1e-9);
  }
}

TEST(Sos, SampleDependsOnIndexOnly) {
  const SosGenerator g(cfg(20000.0));
  std::vector<cplx> whole(1000), part(250);
  g.fill(0, whole);
  for (std::uint64_t first : {0u, 37u, 64u, 500u, 750u}) {
    g.fill(first, part);
    for (std::size_t i = 0; i < part.size(); ++i) EXPECT_EQ(part[i], whole[first + i]);
  }
}

TEST(Sos, SeedReproducible) {
  const SosGenerator a(cfg(3000.0, 5)), b(cfg(3000.0, 5)), c(cfg(3000.0, 6));
  EXPECT_EQ(a(0.123), b(0.123));
  EXPECT_NE(a(0.123), c(0.123));
}

TEST(Rician, UnitPowerAndRiceLaw) {
  for (double k : {0.0, 1.0, 8.6193}) {
    RicianFading f({1.0, KFactor(k), 33356.4, 2.0}, cfg(66712.8, 3));
    std::vector<cplx> h(1'000'000);
    f.fill(0, h);
    std::vector<double> r(h.size());
    double p = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      r[i] = std::abs(h[i]);
      p += r[i] * r[i];
    }
    EXPECT_NEAR(p / static_cast<double>(h.size()), 1.0, 0.02) << k;
    EXPECT_LT(oracle::rice_ks(r, k), 0.01) << k;
  }
}

TEST(Rician, DiffuseAutocorrelationFollowsBessel) {
  const double fd = 3335.64;
  const SosGenerator g(cfg(fd, 9));
  std::vector<cplx> z(1'000'000);
  g.fill(0, z);
  // second zero of J0 sits at fD tau = 0.8785, i.e. about 26 samples here
  for (std::size_t lag = 0; lag <= 30; lag += 2) {
    const double ref = std::cyl_bessel_j(0.0, 2 * constants::pi * fd * static_cast<double>(lag) * 1e-5);
    EXPECT_NEAR(oracle::autocorr(z, lag), ref, 0.05) << lag;
  }
}

TEST(Rician, PureLosHasConstantEnvelope) {
  RicianFading f({2.0, INFINITE_K, 1000.0, 30.0}, cfg(66712.8));
  std::vector<cplx> h(1000);
  f.fill(0, h);
  for (const auto& v : h) EXPECT_NEAR(std::abs(v), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::arg(h[1] / h[0]), 2 * constants::pi * 1000.0 * 1e-5, 1e-9);
}

TEST(Rician, FillMatchesPointEvaluation) {
  RicianFading f({0.5, KFactor(2.0), 1234.0, 3.0}, cfg(8000.0));
  std::vector<cplx> h(100);
  f.fill(200, h);
  for (std::size_t i = 0; i < h.size(); i += 9) EXPECT_NEAR(std::abs(h[i] - f((200.0 + i) * 1e-5)), 0.0, 1e-9);
}

TEST(Rician, RejectsBadParams) {
  EXPECT_THROW(RicianFading({0.0, KFactor(1.0), 0.0, 0.0}, cfg(10.0)), DomainError);
  EXPECT_THROW(RicianFading({1.0, KFactor(-1.0), 0.0, 0.0}, cfg(10.0)), DomainError);
}

TEST(Fir, HalfSampleDelay) {
  FirChannel ch;
  ch.path_delay_s = 0.5e-5;
  std::vector<cplx> s(64, cplx{});
  s[32] = 1.0;
  for (int n = -8; n <= 8; ++n) {
    const double ref = std::sin(constants::pi * (0.5 - n)) / (constants::pi * (0.5 - n));
    EXPECT_NEAR(fir_apply(ch, s, static_cast<std::size_t>(32 + n)).real(), ref, 1e-12) << n;
  }
}

TEST(Fir, IntegerDelayIsIdentity) {
  FirChannel ch;
  std::vector<cplx> s(40);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {static_cast<double>(i), -1.0};
  for (std::size_t i = 8; i < 32; ++i) EXPECT_NEAR(std::abs(fir_apply(ch, s, i) - s[i]), 0.0, 1e-12);
}

TEST(Fir, WindowNotCovered) {
  FirChannel ch;
  std::vector<cplx> s(20);
  EXPECT_THROW(fir_apply(ch, s, 3), std::out_of_range);
  EXPECT_THROW(fir_apply(ch, s, 15), std::out_of_range);
  ch.taps.assign(5, 1.0);
  EXPECT_THROW(ch.validate(), DomainError);
}

TEST(DopplerFilter, UnitEnergyAndShape) {
  const auto taps = doppler_filter_taps(3335.64, 1e-5, 257);
  double e = 0.0;
  for (double v : taps) e += v * v;
  EXPECT_NEAR(e, 1.0, 1e-12);
  for (std::size_t i = 0; i < taps.size(); ++i) EXPECT_NEAR(taps[i], taps[taps.size() - 1 - i], 1e-12);
  EXPECT_EQ(doppler_filter_taps(0.0, 1e-5, 31), std::vector<double>{1.0});
  EXPECT_THROW(doppler_filter_taps(60000.0, 1e-5, 31), DomainError);
}

TEST(DopplerFilter, OutputPowerPreserved) {
  Rng rng(4);
  const auto taps = doppler_filter_taps(3335.64, 1e-5, 129);
  const auto z = filtered_gaussian(taps, 200000, 2.0, rng);
  double p = 0.0;
  for (const auto& v : z) p += std::norm(v);
  EXPECT_NEAR(p / static_cast<double>(z.size()), 2.0, 0.1);
  EXPECT_GT(oracle::autocorr(z, 5) / oracle::autocorr(z, 0), 0.5);
}

TEST(Dump, Complex64LittleEndian) {
  std::ostringstream os;
  const std::vector<cplx> v{{1.0, -2.0}};
  write_complex64_le(os, v);
  const std::string s = os.str();
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(s[3]), 0x3F);  // 1.0f = 0x3F800000
  EXPECT_EQ(static_cast<unsigned char>(s[7]), 0xC0);  // -2.0f = 0xC0000000
}

TEST(Dump, WaveformCsv) {
  std::ostringstream os;
  const std::vector<cplx> v{{3.0, 4.0}};
  write_waveform_csv(os, v, 0.0, 1e-5);
  EXPECT_EQ(os.str(), "t_s,re,im,abs\n0,3,4,5\n");
}
