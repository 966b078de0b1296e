#include <vector>

#include <gtest/gtest.h>

#include "mea/network.hpp"
#include "oracles.hpp"

using namespace mea;

namespace {

Transmitter omni_macro(Point2D pos, double power = 46.0) {
  return {0, pos, power, AntennaPattern::omni(), PathlossModel::macro_uma(), false};
}

RxPowerMap map_of(std::vector<std::vector<double>> rows) {
  RxPowerMap m(rows.size(), rows.front().size());
  for (std::size_t u = 0; u < rows.size(); ++u)
    for (std::size_t t = 0; t < rows[u].size(); ++t) m.at(u, t) = rows[u][t];
  return m;
}

// Hotspot 40 m east of the SCBS in the 500 m layout.
Scene fixture_scene() {
  Scene s;
  s.radio = RadioParams{};
  s.macros = macro_transmitters(build_layout(500.0), s.radio);
  s.scbs_position = {110, 120};
  s.hotspot = {{150, 120}, 10};
  return s;
}

}  // namespace

TEST(RxPowerMap, SingleOmniAtOneKilometre) {
  const std::vector<Point2D> ues{{1000, 0}};
  const std::vector<Transmitter> txs{omni_macro({0, 0})};
  EXPECT_TRUE(oracle::rel_close(rx_power_map(ues, txs).at(0, 0), -82.1));
}

TEST(RxPowerMap, AddingTransmittersKeepsExistingEntries) {
  const std::vector<Point2D> ues{{300, 40}, {-20, 900}};
  std::vector<Transmitter> txs{omni_macro({0, 0}), omni_macro({500, 0}, 40)};
  const auto a = rx_power_map(ues, txs);
  txs.push_back(omni_macro({0, 500}));
  txs.push_back(omni_macro({-500, 0}));
  const auto b = rx_power_map(ues, txs);
  EXPECT_EQ(b.n_transmitters(), 2 * a.n_transmitters());
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(a.at(u, t), b.at(u, t));
}

TEST(RxPowerMap, BoresightAdvantageEqualsPatternDrop) {
  const auto patch = AntennaPattern::patch(7, 90, 15);
  const std::vector<Transmitter> txs{{0, {0, 0}, 20, patch, PathlossModel::smallcell_outdoor(), true}};
  const std::vector<Point2D> ues{{100, 0}, {0, 100}};
  const auto m = rx_power_map(ues, txs);
  EXPECT_NEAR(m.at(0, 0) - m.at(1, 0), std::min(12.0 * (90.0 / 90.0) * (90.0 / 90.0), 15.0), 1e-9);
}

TEST(Association, StrictInequalityMacroWinsTies) {
  const auto m = map_of({{-75, -70}, {-70, -75}, {-70, -70}});
  const auto s = associate(m, 1);
  EXPECT_EQ(s[0], 1u);
  EXPECT_EQ(s[1], 0u);
  EXPECT_EQ(s[2], 0u);
}

TEST(Association, Idempotent) {
  const auto m = map_of({{-75, -80, -70}, {-60, -65, -90}, {-99, -98, -97}});
  EXPECT_EQ(associate(m, 2), associate(m, 2));
  EXPECT_EQ(served_count(m, 2), 2u);
}

TEST(Association, NoUeInDominanceRegion) {
  const auto m = map_of({{-60, -90}, {-61, -95}});
  EXPECT_EQ(served_count(m, 1), 0u);
}

TEST(Association, CoLocatedCrowdNearScbs) {
  // SCBS at the origin, one macro 1 km away; 30 UEs 10 m from the SCBS.
  std::vector<Transmitter> txs{omni_macro({1010, 0})};
  txs[0].pattern = AntennaPattern::omni(14);
  txs.push_back({1, {0, 0}, 20, AntennaPattern::omni(), PathlossModel::smallcell_outdoor(), true});
  const std::vector<Point2D> ues(30, Point2D{10, 0});
  const auto m = rx_power_map(ues, txs);
  // 20 - (140.7 - 36.7) = -47.3 dBm versus 46 + 14 - 128.1 = -68.1 dBm
  EXPECT_NEAR(m.at(0, 1), -47.3, 1e-9);
  EXPECT_NEAR(m.at(0, 0), -68.1, 1e-9);
  EXPECT_EQ(served_count(m, 1), 30u);
}

TEST(Sinr, NoInterferenceEqualsSnr) {
  const auto m = map_of({{-68.1}});
  const std::vector<std::size_t> servers{0};
  EXPECT_NEAR(ue_sinr_db(m, servers, 0, -95.0), 26.9, 1e-9);
}

TEST(Sinr, OneInterferer) {
  const auto m = map_of({{-68.1, -75.0}});
  const std::vector<std::size_t> servers{0};
  EXPECT_TRUE(oracle::rel_close(ue_sinr_db(m, servers, 0, -95.0), oracle::kSinrOneInterferer));
}

TEST(Sinr, NeverAboveSnr) {
  const auto m = map_of({{-70, -80, -90, -85}});
  const std::vector<std::size_t> servers{0};
  EXPECT_LT(ue_sinr_db(m, servers, 0, -95.0), -70.0 + 95.0);
}

TEST(Capacity, Examples) {
  const ShannonParams p;
  EXPECT_TRUE(oracle::rel_close(capacity_bps(mw_to_dbm(2.0), 10e6, p), oracle::kCapAtSinrEff));
  EXPECT_TRUE(oracle::rel_close(capacity_bps(60, 10e6, p), oracle::kCapAt60dB));
  EXPECT_NEAR(capacity_bps(-400, 10e6, p), 0.0, 1e-9);
}

TEST(Capacity, MonotoneAndCapped) {
  const ShannonParams p;
  double prev = 0;
  for (double s = -20; s <= 60; s += 0.5) {
    const double c = capacity_bps(s, 10e6, p);
    EXPECT_GE(c, prev);
    EXPECT_LE(c, 44e6);
    prev = c;
  }
}

TEST(Rates, RoundRobinSharing) {
  const ShannonParams p;
  const std::vector<std::size_t> one{3};
  const std::vector<double> s1{10.0};
  EXPECT_DOUBLE_EQ(ue_rates(one, s1, 10e6, p)[0], capacity_bps(10.0, 10e6, p));
  const std::vector<std::size_t> two{3, 3};
  const std::vector<double> s2{10.0, 10.0};
  const auto r = ue_rates(two, s2, 10e6, p);
  EXPECT_DOUBLE_EQ(r[0], capacity_bps(10.0, 10e6, p) / 2);
  EXPECT_DOUBLE_EQ(r[1], r[0]);
}

TEST(Rates, Totals) {
  EXPECT_EQ(total_throughput(std::vector<double>{}), 0.0);
  EXPECT_EQ(total_throughput(std::vector<double>{1e6, 2e6}), 3e6);
}

TEST(GammaHs, FrozenFixture) {
  EXPECT_TRUE(oracle::rel_close(gamma_hs_db(fixture_scene()), oracle::kGammaFixtureDb));
}

TEST(GammaHs, WithoutMacrosEqualsSnr) {
  const RadioParams r;
  const double g = gamma_hs_db(std::vector<Transmitter>{}, {0, 0}, {40, 0}, r);
  const double snr = r.scbs_tx_power_dbm - pathloss_db(r.scbs_pathloss, 40) - r.noise_dbm();
  EXPECT_NEAR(g, snr, 1e-9);
}

TEST(Scene, RotationPreservesServedCount) {
  Scene s = fixture_scene();
  s.scbs_pattern = AntennaPattern::patch(7, 90, 15, 0);
  for (int i = 0; i < 10; ++i) s.ues.positions.push_back({150.0 + i, 118.0 + 0.5 * i});
  s.ues.hotspot_flags.assign(10, true);
  const auto base = evaluate_scene(s);
  const auto rot = evaluate_scene(rotate_scene(s, s.scbs_position, 90));
  EXPECT_EQ(base.served, rot.served);
  EXPECT_NEAR(base.total_bps, rot.total_bps, 1e-6 * base.total_bps);
}
