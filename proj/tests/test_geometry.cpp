#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mea/geometry.hpp"
#include "mea/random.hpp"

using namespace mea;

TEST(Layout, SevenSitesTwentyOneSectors) {
  const auto l = build_layout(500.0);
  EXPECT_EQ(l.n_sites(), 7u);
  EXPECT_EQ(l.n_sectors(), 21u);
}

TEST(Layout, FirstRingSiteOnPositiveXAxis) {
  const auto l = build_layout(500.0);
  EXPECT_NEAR(l.sites[1].x, 500.0, 1e-9);
  EXPECT_NEAR(l.sites[1].y, 0.0, 1e-9);
}

TEST(Layout, RingSitesAtInterSiteDistance) {
  const auto l = build_layout(500.0);
  for (std::size_t s = 1; s < l.n_sites(); ++s) EXPECT_NEAR(distance(l.sites[0], l.sites[s]), 500.0, 1e-9);
}

TEST(Layout, RejectsNonPositiveIsd) {
  EXPECT_THROW(build_layout(0.0), InvalidArgument);
  EXPECT_THROW(build_layout(-1.0), InvalidArgument);
}

TEST(Layout, SixtyDegreeSymmetry) {
  const auto l = build_layout(750.0);
  for (std::size_t s = 1; s < l.n_sites(); ++s) {
    const Point2D r = rotate_about(l.sites[s], {0, 0}, 60.0);
    double best = 1e9;
    for (std::size_t t = 1; t < l.n_sites(); ++t) best = std::min(best, distance(r, l.sites[t]));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Layout, SectorBoresightsAndOffset) {
  const auto l = build_layout(500.0, 10.0);
  EXPECT_DOUBLE_EQ(l.sectors[0].boresight_deg, 40.0);
  EXPECT_DOUBLE_EQ(l.sectors[1].boresight_deg, 160.0);
  EXPECT_DOUBLE_EQ(l.sectors[2].boresight_deg, 280.0);
}

TEST(Bearing, Examples) {
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(bearing_deg({0, 0}, {0, 5}), 90.0);
  EXPECT_NEAR(bearing_deg({1, 1}, {0, 0}), 225.0, 1e-12);
  EXPECT_THROW(bearing_deg({2, 3}, {2, 3}), InvalidArgument);
}

TEST(AngularDistance, Examples) {
  EXPECT_DOUBLE_EQ(angular_distance_deg(350, 10), 20.0);
  EXPECT_DOUBLE_EQ(angular_distance_deg(90, 90), 0.0);
  EXPECT_DOUBLE_EQ(angular_distance_deg(0, 180), 180.0);
}

TEST(AngularDistance, SymmetricAndBounded) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = uniform(rng, -720, 720), b = uniform(rng, -720, 720);
    const double d = angular_distance_deg(a, b);
    EXPECT_DOUBLE_EQ(d, angular_distance_deg(b, a));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 180.0);
  }
}

TEST(SectorSampling, InsideWedgeAndAwayFromSites) {
  const auto l = build_layout(500.0);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Point2D p = sample_point_in_sector(l, 0, rng);
    EXPECT_TRUE(in_hex_cell(l, 0, p));
    EXPECT_TRUE(in_sector_wedge(l, 0, p));
    const double b = signed_angle_deg(bearing_deg(l.sites[0], p), 30.0);
    EXPECT_GT(b, -60.0);
    EXPECT_LE(b, 60.0);
    for (const auto& s : l.sites) EXPECT_GE(distance(s, p), 10.0);
  }
}

TEST(SectorSampling, MeanBearingNearBoresight) {
  const auto l = build_layout(500.0);
  Rng rng(12);
  double sx = 0, sy = 0;
  for (int i = 0; i < 10000; ++i) {
    const double b = deg2rad(bearing_deg(l.sites[0], sample_point_in_sector(l, 0, rng)));
    sx += std::cos(b);
    sy += std::sin(b);
  }
  EXPECT_LE(angular_distance_deg(rad2deg(std::atan2(sy, sx)), 30.0), 5.0);
}

TEST(DiskSampling, WithinRadius) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LE(distance(sample_point_in_disk({5, 5}, 10, rng), {5, 5}), 10.0);
}

TEST(DiskSampling, InnerHalfRadiusHoldsQuarterOfPoints) {
  Rng rng(4);
  int inner = 0;
  for (int i = 0; i < 10000; ++i) inner += distance(sample_point_in_disk({0, 0}, 10, rng), {0, 0}) <= 5.0;
  EXPECT_NEAR(inner / 10000.0, 0.25, 0.02);
}

TEST(DiskSampling, DegenerateRadius) {
  Rng rng(5);
  const Point2D p = sample_point_in_disk({100, -40}, 0.001, rng);
  EXPECT_NEAR(p.x, 100, 1e-3);
  EXPECT_NEAR(p.y, -40, 1e-3);
}

TEST(UeSampling, OneThirdInHotspot) {
  const auto l = build_layout(1000.0);
  Rng rng(6);
  const Hotspot hs{sample_point_in_sector(l, 0, rng), 10.0};
  const auto pop = sample_ues(l, 0, UeRegion::kSector, hs, 30, rng);
  ASSERT_EQ(pop.size(), 30u);
  EXPECT_EQ(pop.n_hotspot(), 10u);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop.hotspot_flags[i]) {
      EXPECT_LE(distance(pop.positions[i], hs.center), 10.0);
    }
  }
}

TEST(Rng, DerivedSeedsDifferPerPart) {
  EXPECT_NE(derive_seed(42, {0, 1}), derive_seed(42, {1, 0}));
  EXPECT_EQ(derive_seed(42, {3, 4}), derive_seed(42, {3, 4}));
}
