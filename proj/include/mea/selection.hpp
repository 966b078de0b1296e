#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mea/errors.hpp"
#include "mea/geometry.hpp"
#include "mea/network.hpp"
#include "mea/propagation.hpp"
#include "mea/random.hpp"

namespace mea {

// How a fresh UE population (and its shadowing draw) is generated for a
// fixed SCBS/hotspot placement.
struct UeDropModel {
  NetworkLayout layout;
  std::size_t sector = 0;
  UeRegion region = UeRegion::kSector;
  std::size_t n_ues = 30;
  double min_site_distance_m = 10.0;
  double shadowing_sigma_db = 0.0;

  void resample(Scene& scene, Rng& rng) const {
    scene.ues = sample_ues(layout, sector, region, scene.hotspot, n_ues, rng, min_site_distance_m);
    scene.shadowing_db.clear();
    if (shadowing_sigma_db > 0.0) {
      std::normal_distribution<double> n(0.0, shadowing_sigma_db);
      scene.shadowing_db.resize(n_ues * (scene.macros.size() + 1));
      for (auto& v : scene.shadowing_db) v = n(rng);
    }
  }
};

// A placement with an MEA-equipped SCBS; UEs are redrawn per training round.
struct TrainingTemplate {
  Scene scene;
  MeaConfig mea;
  UeDropModel ues;
};

struct SelectionCandidate {
  std::size_t element_idx = 0;
  std::size_t s_ue = 0;
  double r_total = 0.0;
};

using Candidates = std::array<SelectionCandidate, kMeaElements>;

inline Candidates evaluate_candidates(const Scene& scene, const MeaConfig& mea) {
  Candidates out;
  for (std::size_t i = 0; i < kMeaElements; ++i) {
    const LinkState st = evaluate_scene(scene.with_pattern(mea.element_pattern(i)));
    out[i] = {i, st.served, st.total_bps};
  }
  return out;
}

// Served counts only, one per element. Macro powers do not depend on the
// active element, so the best macro per UE is computed once.
inline std::array<std::size_t, kMeaElements> element_served_counts(const Scene& scene,
                                                                    const MeaConfig& mea) {
  const std::size_t n_macro = scene.macros.size();
  const std::size_t width = n_macro + 1;
  const bool shadowed = !scene.shadowing_db.empty();
  std::vector<double> best(scene.ues.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < scene.ues.size(); ++u)
    for (std::size_t t = 0; t < n_macro; ++t) {
      double v = link_rx_dbm(scene.macros[t], scene.ues.positions[u]);
      if (shadowed) v += scene.shadowing_db[u * width + t];
      best[u] = std::max(best[u], v);
    }
  std::array<std::size_t, kMeaElements> out{};
  for (std::size_t i = 0; i < kMeaElements; ++i) {
    const Transmitter scbs = scene.scbs_transmitter(mea.element_pattern(i));
    for (std::size_t u = 0; u < scene.ues.size(); ++u) {
      double v = link_rx_dbm(scbs, scene.ues.positions[u]);
      if (shadowed) v += scene.shadowing_db[u * width + n_macro];
      out[i] += v > best[u] ? 1 : 0;
    }
  }
  return out;
}

// First index of the maximum.
template <typename T>
std::size_t argmax_first(std::span<const T> values) {
  if (values.empty()) throw InvalidArgument("argmax_first: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// Throughput-optimal element (centralized rule).
inline std::size_t select_centralized(const Candidates& c) {
  std::array<double, kMeaElements> r{};
  for (std::size_t i = 0; i < kMeaElements; ++i) r[i] = c[i].r_total;
  return c[argmax_first<double>(r)].element_idx;
}

// Most-served-UEs element (distributed rule).
inline std::size_t select_distributed(const Candidates& c) {
  std::array<std::size_t, kMeaElements> s{};
  for (std::size_t i = 0; i < kMeaElements; ++i) s[i] = c[i].s_ue;
  return c[argmax_first<std::size_t>(s)].element_idx;
}

// Element whose boresight is angularly closest to the hotspot centre.
inline std::size_t truth_element_by_angle(Point2D scbs, Point2D hotspot_center,
                                          const MeaConfig& mea) {
  const double bearing = bearing_deg(scbs, hotspot_center);
  std::size_t best = 0;
  double best_d = angular_distance_deg(mea.boresight(0), bearing);
  for (std::size_t i = 1; i < kMeaElements; ++i) {
    const double d = angular_distance_deg(mea.boresight(i), bearing);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

inline std::size_t truth_element_by_angle(const TrainingTemplate& t) {
  return truth_element_by_angle(t.scene.scbs_position, t.scene.hotspot.center, t.mea);
}

struct TrainingRecord {
  // counts[element][round]
  std::array<std::vector<std::size_t>, kMeaElements> counts;
  std::size_t chosen = 0;
  std::size_t truth = 0;
  bool correct = false;
  std::size_t rounds = 0;
};

// Draws one round: fresh UEs, served count under each element.
inline std::array<std::size_t, kMeaElements> training_round(const TrainingTemplate& t, Rng& rng) {
  Scene scene = t.scene;
  t.ues.resample(scene, rng);
  return element_served_counts(scene, t.mea);
}

inline TrainingRecord run_training(const TrainingTemplate& t, std::size_t k, Rng& rng) {
  if (k < 1) throw InvalidArgument("run_training: need at least one round");
  TrainingRecord rec;
  rec.rounds = k;
  for (auto& row : rec.counts) row.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto counts = training_round(t, rng);
    for (std::size_t i = 0; i < kMeaElements; ++i) rec.counts[i].push_back(counts[i]);
  }
  // Row sums share the denominator k, so comparing sums compares means exactly.
  std::array<std::size_t, kMeaElements> sums{};
  for (std::size_t i = 0; i < kMeaElements; ++i)
    for (auto c : rec.counts[i]) sums[i] += c;
  rec.chosen = argmax_first<std::size_t>(sums);
  rec.truth = truth_element_by_angle(t);
  rec.correct = rec.chosen == rec.truth;
  return rec;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;  // NaN when both variances vanish
};

namespace detail {

struct Moments {
  double n = 0.0, mean = 0.0, var = 0.0;
};

template <typename T>
Moments sample_moments(std::span<const T> xs) {
  Moments m;
  m.n = static_cast<double>(xs.size());
  for (const auto& x : xs) m.mean += static_cast<double>(x);
  m.mean /= m.n;
  for (const auto& x : xs) {
    const double d = static_cast<double>(x) - m.mean;
    m.var += d * d;
  }
  m.var /= (m.n - 1.0);
  return m;
}

}  // namespace detail

// Welch's unequal-variance statistic for mean(a) - mean(b) with
// Welch-Satterthwaite degrees of freedom.
template <typename T>
WelchResult welch_t(std::span<const T> a, std::span<const T> b) {
  if (a.size() < 2 || b.size() < 2)
    throw InvalidArgument("welch_t: each sample needs at least two values");
  const auto ma = detail::sample_moments(a);
  const auto mb = detail::sample_moments(b);
  const double qa = ma.var / ma.n;
  const double qb = mb.var / mb.n;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double t = ma.mean > mb.mean ? inf : (ma.mean == mb.mean ? 0.0 : -inf);
    return {t, std::numeric_limits<double>::quiet_NaN()};
  }
  const double df = se2 * se2 / (qa * qa / (ma.n - 1.0) + qb * qb / (mb.n - 1.0));
  return {(ma.mean - mb.mean) / std::sqrt(se2), df};
}

// Upper-tail p-value P(T > t) for the one-sided test.
inline double one_sided_p(const WelchResult& w) {
  if (std::isinf(w.t)) return w.t > 0 ? 0.0 : 1.0;
  if (std::isnan(w.df)) return w.t == 0.0 ? 0.5 : (w.t > 0 ? 0.0 : 1.0);
  const boost::math::students_t_distribution<double> dist(w.df);
  return boost::math::cdf(boost::math::complement(dist, w.t));
}

enum class TTestComparison { kRunnerUp, kPooled };

struct TTestOutcome {
  std::optional<std::size_t> rounds_needed;  // empty: not reached
  double final_t = 0.0;
  double final_p = 1.0;
  double alpha = 0.05;
  std::size_t leader = 0;
};

// Welch test of the leading element against the runner-up (or all others
// pooled) over the rounds recorded so far.
inline std::pair<WelchResult, std::size_t> leader_test(
    const std::array<std::vector<std::size_t>, kMeaElements>& counts, TTestComparison cmp) {
  std::array<std::size_t, kMeaElements> sums{};
  for (std::size_t i = 0; i < kMeaElements; ++i)
    for (auto c : counts[i]) sums[i] += c;
  const std::size_t leader = argmax_first<std::size_t>(sums);
  if (cmp == TTestComparison::kPooled) {
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < kMeaElements; ++i)
      if (i != leader) others.insert(others.end(), counts[i].begin(), counts[i].end());
    return {welch_t<std::size_t>(counts[leader], others), leader};
  }
  std::size_t runner = leader == 0 ? 1 : 0;
  for (std::size_t i = 0; i < kMeaElements; ++i)
    if (i != leader && sums[i] > sums[runner]) runner = i;
  return {welch_t<std::size_t>(counts[leader], counts[runner]), leader};
}

inline TTestOutcome rounds_to_significance(const TrainingTemplate& t, double alpha,
                                           std::size_t max_rounds, Rng& rng,
                                           TTestComparison cmp = TTestComparison::kRunnerUp) {
  if (max_rounds < 2) throw InvalidArgument("rounds_to_significance: max_rounds must be >= 2");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidArgument("rounds_to_significance: alpha must lie in (0, 1]");
  TTestOutcome out;
  out.alpha = alpha;
  std::array<std::vector<std::size_t>, kMeaElements> counts;
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    const auto c = training_round(t, rng);
    for (std::size_t i = 0; i < kMeaElements; ++i) counts[i].push_back(c[i]);
    if (round < 2) continue;
    const auto [w, leader] = leader_test(counts, cmp);
    out.final_t = w.t;
    out.final_p = one_sided_p(w);
    out.leader = leader;
    if (out.final_p < alpha) {
      out.rounds_needed = round;
      break;
    }
  }
  return out;
}

// True when the single-round distributed choice never changes across
// `resamples` independent UE populations.
inline bool single_round_choice_constant(const TrainingTemplate& t, std::size_t resamples,
                                         Rng& rng) {
  std::optional<std::size_t> first;
  for (std::size_t r = 0; r < resamples; ++r) {
    const auto c = training_round(t, rng);
    const std::size_t pick = argmax_first<std::size_t>(c);
    if (!first) first = pick;
    else if (*first != pick) return false;
  }
  return true;
}

}  // namespace mea
