#include <array>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "mea/experiment.hpp"
#include "mea/selection.hpp"
#include "oracles.hpp"

using namespace mea;

namespace {

ExperimentConfig small_config(std::size_t n_drops = 4) {
  ExperimentConfig c;
  c.n_drops = n_drops;
  return c;
}

// A 5 dB placement with its hotspot moved `dist` metres due east of the SCBS
// and only hotspot UEs present.
Scene hotspot_east_scene(const Simulation& sim, double dist) {
  const auto d = generate_drop(sim, 4, 0);
  Scene s = make_scene(sim, d, std::nullopt);
  s.hotspot.center = s.scbs_position + Point2D{dist, 0};
  Rng rng(99);
  s.ues = {};
  for (int i = 0; i < 10; ++i) {
    s.ues.positions.push_back(sample_point_in_disk(s.hotspot.center, s.hotspot.radius, rng));
    s.ues.hotspot_flags.push_back(true);
  }
  s.shadowing_db.clear();
  return s;
}

}  // namespace

TEST(Argmax, CentralizedExamples) {
  Candidates c{};
  const std::array<double, 4> r{10e6, 12e6, 9e6, 9e6};
  for (std::size_t i = 0; i < 4; ++i) c[i] = {i, 0, r[i]};
  EXPECT_EQ(select_centralized(c), 1u);
  for (auto& x : c) x.r_total = 9e6;
  EXPECT_EQ(select_centralized(c), 0u);
}

TEST(Argmax, DistributedExamples) {
  Candidates c{};
  const std::array<std::size_t, 4> s{12, 3, 2, 1};
  for (std::size_t i = 0; i < 4; ++i) c[i] = {i, s[i], 0};
  EXPECT_EQ(select_distributed(c), 0u);
  const std::array<std::size_t, 4> t{5, 5, 2, 1};
  for (std::size_t i = 0; i < 4; ++i) c[i].s_ue = t[i];
  EXPECT_EQ(select_distributed(c), 0u);
}

TEST(Argmax, InvariantUnderPositiveScaling) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 4> v{}, w{};
    const double k = uniform(rng, 0.01, 100);
    for (std::size_t i = 0; i < 4; ++i) {
      v[i] = uniform(rng, 0, 1e7);
      w[i] = v[i] * k;
    }
    EXPECT_EQ(argmax_first<double>(v), argmax_first<double>(w));
  }
  EXPECT_THROW(argmax_first<double>(std::span<const double>{}), InvalidArgument);
}

TEST(AngleTruth, Examples) {
  const MeaConfig m{AntennaPattern::patch(7, 90, 15), 0.0, 0};
  auto at = [&](double b) { return truth_element_by_angle({0, 0}, polar({0, 0}, 50, b), m); };
  EXPECT_EQ(at(100), 1u);
  EXPECT_EQ(at(45), 0u);
  EXPECT_EQ(at(269), 3u);
}

TEST(Candidates, HotspotDueEastFavoursEastElement) {
  const Simulation sim(small_config());
  const Scene s = hotspot_east_scene(sim, 40.0);
  const MeaConfig m{sim.single_patch, 0.0, 0};
  const auto c = evaluate_candidates(s, m);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(c[0].s_ue, c[i].s_ue);
  EXPECT_EQ(select_distributed(c), 0u);
}

TEST(Candidates, FastCountsMatchFullEvaluation) {
  ExperimentConfig cfg = small_config();
  cfg.shadowing_sigma_db = 4.0;
  const Simulation sim(cfg);
  for (std::size_t b = 0; b < 5; ++b) {
    const auto d = generate_drop(sim, b, 1);
    const auto s = make_scene(sim, d, std::nullopt);
    const auto m = make_mea(d, sim.double_patch);
    const auto full = evaluate_candidates(s, m);
    const auto fast = element_served_counts(s, m);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(full[i].s_ue, fast[i]);
  }
}

TEST(Candidates, RotationByQuarterTurnShiftsElement) {
  const Simulation sim(small_config());
  for (std::size_t b = 0; b < 5; ++b) {
    const auto d = generate_drop(sim, b, 2);
    const Scene s = make_scene(sim, d, std::nullopt);
    const Scene r = rotate_scene(s, s.scbs_position, 90.0);
    const auto m = make_mea(d, sim.single_patch);
    const auto c0 = evaluate_candidates(s, m);
    const auto c1 = evaluate_candidates(r, m);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(c0[i].s_ue, c1[(i + 1) % 4].s_ue);
      EXPECT_NEAR(c0[i].r_total, c1[(i + 1) % 4].r_total, 1e-9 * c0[i].r_total);
    }
    EXPECT_EQ((select_centralized(c0) + 1) % 4, select_centralized(c1));
  }
}

TEST(Welch, EqualSamplesGiveZero) {
  const std::vector<int> a{10, 10}, b{10, 10};
  EXPECT_EQ(welch_t<int>(a, b).t, 0.0);
}

TEST(Welch, FrozenOracle) {
  const std::vector<double> a{12, 11, 13, 12}, b{8, 9, 7, 8};
  const auto w = welch_t<double>(a, b);
  EXPECT_TRUE(oracle::rel_close(w.t, oracle::kWelchT));
  EXPECT_TRUE(oracle::rel_close(w.df, oracle::kWelchDf));
  EXPECT_NEAR(one_sided_p(w), oracle::kWelchOneSidedP, 1e-12);
}

TEST(Welch, ZeroVarianceSeparatedIsInfinite) {
  const std::vector<int> a{9, 9}, b{5, 5};
  const auto w = welch_t<int>(a, b);
  EXPECT_EQ(w.t, std::numeric_limits<double>::infinity());
  EXPECT_EQ(one_sided_p(w), 0.0);
}

TEST(Welch, NeedsTwoSamples) {
  const std::vector<int> a{1}, b{1, 2};
  EXPECT_THROW(welch_t<int>(a, b), InvalidArgument);
}

TEST(Welch, Antisymmetric) {
  const std::vector<double> a{3, 5, 4, 8, 1}, b{2, 2, 7, 1};
  EXPECT_DOUBLE_EQ(welch_t<double>(a, b).t, -welch_t<double>(b, a).t);
}

TEST(LeaderTest, ZeroVarianceLeaderPassesImmediately) {
  std::array<std::vector<std::size_t>, 4> counts{{{10, 10}, {0, 0}, {0, 0}, {0, 0}}};
  for (auto cmp : {TTestComparison::kRunnerUp, TTestComparison::kPooled}) {
    const auto [w, leader] = leader_test(counts, cmp);
    EXPECT_EQ(leader, 0u);
    EXPECT_EQ(one_sided_p(w), 0.0);
  }
}

namespace {

// 5 dB placement whose hotspot sits on element 0's boresight, 20 m away,
// with a near-point hotspot and three UEs per round.
TrainingTemplate dominant_template(const Simulation& sim) {
  const auto d = generate_drop(sim, 4, 3);
  TrainingTemplate t = make_training(sim, d, sim.single_patch);
  t.scene.hotspot.center = t.scene.scbs_position + Point2D{20, 0};
  t.scene.hotspot.radius = 0.001;
  t.mea.install_offset_deg = 0.0;
  t.ues.n_ues = 3;
  return t;
}

}  // namespace

TEST(RoundsToSignificance, ClearLeaderNeedsTwoRounds) {
  const Simulation sim(small_config());
  const auto t = dominant_template(sim);
  Rng rng(5);
  const auto out = rounds_to_significance(t, 0.05, 100, rng);
  ASSERT_TRUE(out.rounds_needed.has_value());
  EXPECT_EQ(*out.rounds_needed, 2u);
  EXPECT_EQ(out.leader, 0u);
}

TEST(RoundsToSignificance, AlphaOneStopsAtTwo) {
  const Simulation sim(small_config());
  for (std::size_t b = 0; b < 5; ++b) {
    const auto t = make_training(sim, generate_drop(sim, b, 0), sim.single_patch);
    Rng rng(b);
    const auto out = rounds_to_significance(t, 1.0, 100, rng);
    ASSERT_TRUE(out.rounds_needed.has_value());
    EXPECT_EQ(*out.rounds_needed, 2u);
  }
}

TEST(RoundsToSignificance, RejectsBadArguments) {
  const Simulation sim(small_config());
  const auto t = make_training(sim, generate_drop(sim, 0, 0), sim.single_patch);
  Rng rng(1);
  EXPECT_THROW(rounds_to_significance(t, 0.0, 100, rng), InvalidArgument);
  EXPECT_THROW(rounds_to_significance(t, 1.5, 100, rng), InvalidArgument);
  EXPECT_THROW(rounds_to_significance(t, 0.05, 1, rng), InvalidArgument);
}

TEST(RoundsToSignificance, LargerAlphaStopsNoLater) {
  const Simulation sim(small_config(20));
  double strict = 0, loose = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto d = generate_drop(sim, 2, i);
    const auto t = make_training(sim, d, sim.single_patch);
    Rng r1 = make_rng(d.seed, Stream::kTTest), r2 = make_rng(d.seed, Stream::kTTest);
    const auto a = rounds_to_significance(t, 0.05, 100, r1);
    const auto b = rounds_to_significance(t, 0.5, 100, r2);
    strict += static_cast<double>(a.rounds_needed.value_or(100));
    loose += static_cast<double>(b.rounds_needed.value_or(100));
    EXPECT_LE(b.rounds_needed.value_or(100), a.rounds_needed.value_or(100));
  }
  EXPECT_LT(loose, strict);
}

TEST(Training, SingleRoundMatchesDistributedChoice) {
  const Simulation sim(small_config());
  const auto t = make_training(sim, generate_drop(sim, 1, 0), sim.single_patch);
  Rng a(17), b(17);
  const auto rec = run_training(t, 1, a);
  Scene s = t.scene;
  t.ues.resample(s, b);
  EXPECT_EQ(rec.chosen, select_distributed(evaluate_candidates(s, t.mea)));
  EXPECT_THROW(run_training(t, 0, a), InvalidArgument);
}

TEST(Training, TenRoundsFindNearBoresightElement) {
  const Simulation sim(small_config());
  auto d = generate_drop(sim, 2, 5);
  // Rotate the MEA so the hotspot sits 5 degrees off element 0.
  d.install_offset_deg = wrap_deg(bearing_deg(d.scbs_pos, d.hotspot.center) - 5.0);
  const auto t = make_training(sim, d, sim.single_patch);
  ASSERT_EQ(truth_element_by_angle(t), 0u);
  Rng rng(2024);
  int correct = 0;
  for (int i = 0; i < 200; ++i) correct += run_training(t, 10, rng).correct;
  EXPECT_GT(correct / 200.0, 0.9);
}
