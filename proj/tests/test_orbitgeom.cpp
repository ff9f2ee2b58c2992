#include <gtest/gtest.h>

#include <cmath>

#include "islchan/orbitgeom.hpp"

using namespace islchan;
using namespace islchan::orbitgeom;

namespace {

SepGeometry geom(double phi, double d1 = 60.0, double nu = 2.0) {
  SepGeometry g;
  g.phi_deg = phi;
  g.d1_km = d1;
  g.nu_kms = nu;
  return g;
}

}  // namespace

TEST(Distance, TableValues) {
  EXPECT_NEAR(distance_at_angle(geom(30.0)), 69.2820323, 1e-6);
  EXPECT_NEAR(distance_at_angle(geom(2.0)), 60.0365727, 1e-6);
  EXPECT_DOUBLE_EQ(distance_at_angle(geom(0.0)), 60.0);
}

TEST(Distance, SymmetricAndMonotone) {
  double prev = 0.0;
  for (double phi = 0.0; phi < 89.0; phi += 0.5) {
    const double d = distance_at_angle(geom(phi));
    EXPECT_DOUBLE_EQ(d, distance_at_angle(geom(-phi)));
    EXPECT_GE(d, 60.0);
    EXPECT_GE(d, prev);
    prev = d;
  }
}

TEST(Distance, RejectsRightAngle) {
  EXPECT_THROW(distance_at_angle(geom(90.0)), DomainError);
  EXPECT_THROW(distance_at_angle(geom(-95.0)), DomainError);
}

TEST(ObservedFrequency, ApproachAndRecession) {
  const auto g = geom(30.0);
  EXPECT_NEAR(observed_frequency(g, Passage::approach), 10000066713.26, 0.05);
  EXPECT_NEAR(observed_frequency(g, Passage::recession), 10e9 * 299792458.0 / (299792458.0 + 2000.0), 1e-3);
  EXPECT_GT(observed_frequency(g, 0.0, 1.0), g.carrier_hz);
  EXPECT_LT(observed_frequency(g, 2.0, 1.0), g.carrier_hz);
}

TEST(ObservedFrequency, ZeroSpeedIsCarrier) {
  const auto g = geom(10.0, 60.0, 0.0);
  EXPECT_DOUBLE_EQ(observed_frequency(g, Passage::approach), g.carrier_hz);
  EXPECT_DOUBLE_EQ(observed_frequency(g, Passage::recession), g.carrier_hz);
}

TEST(ObservedFrequency, Superluminal) {
  EXPECT_THROW(observed_frequency(geom(0.0, 60.0, 3e5), Passage::approach), DomainError);
}

TEST(Transverse, Models) {
  const auto g = geom(30.0);
  EXPECT_NEAR(transverse_observed_frequency(g, Passage::approach, TransverseModel::literal), 10067160868.1, 0.5);
  EXPECT_NEAR(transverse_observed_frequency(g, Passage::approach, TransverseModel::consistent), 10000033356.5, 0.05);
}

TEST(Transverse, CarrierAtZeroAngle) {
  for (auto m : {TransverseModel::consistent, TransverseModel::literal}) {
    EXPECT_NEAR(transverse_observed_frequency(geom(0.0), Passage::approach, m), 10e9, 1e-6);
    EXPECT_NEAR(los_doppler(geom(0.0), m), 0.0, 1e-6);
  }
}

TEST(Transverse, ModelNames) {
  EXPECT_EQ(transverse_model_from_string(to_string(TransverseModel::literal)), TransverseModel::literal);
  EXPECT_EQ(transverse_model_from_string(to_string(TransverseModel::consistent)), TransverseModel::consistent);
  EXPECT_THROW(transverse_model_from_string("relativistic"), DomainError);
}

TEST(MaxDoppler, Values) {
  EXPECT_NEAR(max_doppler(geom(0.0, 60.0, 2.0)), 66712.82, 0.01);
  EXPECT_NEAR(max_doppler(geom(0.0, 10.0, 0.1)), 3335.64, 0.01);
  EXPECT_NEAR(max_doppler(geom(0.0, 60.0, 4.0)), 133425.64, 0.01);
}

TEST(MaxDoppler, LinearInSpeedAndCarrier) {
  for (double nu : {0.5, 1.0, 3.0, 7.5}) {
    auto g = geom(5.0, 60.0, nu);
    const double base = max_doppler(g);
    g.nu_kms *= 2.0;
    EXPECT_NEAR(max_doppler(g), 2.0 * base, 1e-9 * base);
    g.carrier_hz *= 3.0;
    EXPECT_NEAR(max_doppler(g), 6.0 * base, 1e-9 * base);
  }
}

TEST(JakesPsd, ShapeAndDomain) {
  EXPECT_NEAR(jakes_psd(0.5 * 100.0, 100.0), 1.1547005, 1e-7);
  EXPECT_NEAR(jakes_psd(99.9, 100.0), 22.366272, 1e-5);
  EXPECT_DOUBLE_EQ(jakes_psd(0.0, 100.0), 1.0);
  EXPECT_DOUBLE_EQ(jakes_psd(-30.0, 100.0), jakes_psd(30.0, 100.0));
  EXPECT_THROW(jakes_psd(100.0, 100.0), DomainError);
  EXPECT_THROW(jakes_psd(-150.0, 100.0), DomainError);
}

TEST(DopplerSpec, Bounds) {
  const auto d = doppler_spec(geom(30.0));
  EXPECT_NEAR(d.f_dop_max_hz, 66712.82, 0.01);
  EXPECT_NEAR(d.f_dop_min_hz, 33356.52, 0.01);
  EXPECT_LE(d.f_dop_min_hz, d.f_dop_max_hz);
  EXPECT_DOUBLE_EQ(d.psd(0.0), 1.0);
  // literal model offset exceeds fmax and is clamped
  const auto l = doppler_spec(geom(30.0), TransverseModel::literal);
  EXPECT_DOUBLE_EQ(l.f_dop_min_hz, l.f_dop_max_hz);
}

TEST(Geometry, Validate) {
  auto g = geom(0.0);
  g.d1_km = -1.0;
  EXPECT_THROW(g.validate(), DomainError);
  g = geom(0.0);
  g.carrier_hz = 0.0;
  EXPECT_THROW(g.validate(), DomainError);
}
