#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mea/config.hpp"
#include "mea/errors.hpp"
#include "mea/geometry.hpp"
#include "mea/network.hpp"
#include "mea/random.hpp"
#include "mea/report.hpp"
#include "mea/selection.hpp"

namespace mea {

using Progress = std::function<void(const std::string&)>;

// Runs fn(i) for i in [0, n) on `workers` threads. Results are stored by
// index, so the output does not depend on scheduling. The exception of the
// lowest failing index is rethrown.
template <typename R, typename Fn>
std::vector<R> parallel_map(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Immutable per-run context derived from the configuration.
struct Simulation {
  ExperimentConfig cfg;
  NetworkLayout layout;
  std::vector<Transmitter> macros;
  RadioParams radio;
  UeDropModel ue_model;
  AntennaPattern single_patch;
  AntennaPattern double_patch;

  explicit Simulation(ExperimentConfig c)
      : cfg(std::move(c)),
        layout(build_layout(cfg.isd_m, cfg.sector_offset_deg)),
        radio(cfg.radio()),
        single_patch(cfg.single_patch()),
        double_patch(cfg.double_patch()) {
    macros = macro_transmitters(layout, radio);
    ue_model.layout = layout;
    ue_model.sector = cfg.selected_sector;
    ue_model.region = cfg.ue_region;
    ue_model.n_ues = cfg.n_ues;
    ue_model.min_site_distance_m = cfg.min_site_distance_m;
    ue_model.shadowing_sigma_db = cfg.shadowing_sigma_db;
  }

  std::size_t sector() const { return cfg.selected_sector; }
};

struct DropScenario {
  std::size_t bin_index = 0;
  std::size_t drop_index = 0;
  std::uint64_t seed = 0;
  double gamma_target_db = 0.0;
  double gamma_hs_db = 0.0;
  Point2D scbs_pos;
  Hotspot hotspot;
  UePopulation ues;
  std::vector<double> shadowing_db;
  double install_offset_deg = 0.0;
  std::size_t attempts = 0;
};

inline bool operator==(const DropScenario& a, const DropScenario& b) {
  return a.bin_index == b.bin_index && a.drop_index == b.drop_index && a.seed == b.seed &&
         a.gamma_target_db == b.gamma_target_db && a.gamma_hs_db == b.gamma_hs_db &&
         a.scbs_pos == b.scbs_pos && a.hotspot.center == b.hotspot.center &&
         a.hotspot.radius == b.hotspot.radius && a.ues.positions == b.ues.positions &&
         a.ues.hotspot_flags == b.ues.hotspot_flags && a.shadowing_db == b.shadowing_db &&
         a.install_offset_deg == b.install_offset_deg && a.attempts == b.attempts;
}

inline std::uint64_t drop_seed(std::uint64_t master, std::size_t bin, std::size_t index) {
  return derive_seed(master, {static_cast<std::uint64_t>(bin), static_cast<std::uint64_t>(index)});
}

// Rejection-samples SCBS and hotspot positions until gamma_HS falls within
// the bin, then draws the UE population.
inline DropScenario generate_drop(const Simulation& sim, std::size_t bin_index,
                                  std::size_t drop_index) {
  const auto& cfg = sim.cfg;
  if (bin_index >= cfg.gamma_bins_db.size()) throw InvalidArgument("generate_drop: bad bin index");
  DropScenario d;
  d.bin_index = bin_index;
  d.drop_index = drop_index;
  d.seed = drop_seed(cfg.master_seed, bin_index, drop_index);
  d.gamma_target_db = cfg.gamma_bins_db[bin_index];
  Rng rng = make_rng(d.seed, Stream::kGeometry);
  // Always drawn so a fixed offset leaves the rest of the stream untouched.
  d.install_offset_deg = uniform(rng, 0.0, 90.0);
  if (cfg.install_offset_deg) d.install_offset_deg = *cfg.install_offset_deg;
  d.hotspot.radius = cfg.hotspot_radius_m;
  for (std::size_t attempt = 1; attempt <= cfg.max_drop_attempts; ++attempt) {
    const Point2D scbs = sample_point_in_sector(sim.layout, sim.sector(), rng, cfg.min_site_distance_m);
    const Point2D hs = sample_point_in_sector(sim.layout, sim.sector(), rng, cfg.min_site_distance_m);
    const double g = gamma_hs_db(sim.macros, scbs, hs, sim.radio);
    if (std::abs(g - d.gamma_target_db) <= cfg.gamma_tol_db) {
      d.scbs_pos = scbs;
      d.hotspot.center = hs;
      d.gamma_hs_db = g;
      d.attempts = attempt;
      Scene s;
      s.macros = sim.macros;
      s.hotspot = d.hotspot;
      Rng ue_rng = make_rng(d.seed, Stream::kUes);
      sim.ue_model.resample(s, ue_rng);
      d.ues = std::move(s.ues);
      d.shadowing_db = std::move(s.shadowing_db);
      return d;
    }
  }
  std::ostringstream os;
  os << "gamma bin " << d.gamma_target_db << " dB (+/- " << cfg.gamma_tol_db
     << ") infeasible: no placement accepted after " << cfg.max_drop_attempts << " attempts";
  throw BinInfeasible(os.str(), d.gamma_target_db);
}

inline Scene make_scene(const Simulation& sim, const DropScenario& d,
                        std::optional<AntennaPattern> scbs_pattern) {
  Scene s;
  s.macros = sim.macros;
  s.scbs_position = d.scbs_pos;
  s.scbs_pattern = std::move(scbs_pattern);
  s.hotspot = d.hotspot;
  s.ues = d.ues;
  s.shadowing_db = d.shadowing_db;
  s.radio = sim.radio;
  return s;
}

inline MeaConfig make_mea(const DropScenario& d, const AntennaPattern& element) {
  return {element, d.install_offset_deg, 0};
}

inline TrainingTemplate make_training(const Simulation& sim, const DropScenario& d,
                                      const AntennaPattern& element) {
  return {make_scene(sim, d, std::nullopt), make_mea(d, element), sim.ue_model};
}

struct DropPool {
  std::vector<std::vector<DropScenario>> bins;

  std::size_t n_drops() const { return bins.empty() ? 0 : bins.front().size(); }
};

inline DropPool make_drop_pool(const Simulation& sim, std::size_t workers,
                               const Progress& progress = {}) {
  DropPool pool;
  for (std::size_t b = 0; b < sim.cfg.gamma_bins_db.size(); ++b) {
    pool.bins.push_back(parallel_map<DropScenario>(
        sim.cfg.n_drops, workers, [&](std::size_t i) { return generate_drop(sim, b, i); }));
    if (progress)
      progress("drops: bin " + format_number(sim.cfg.gamma_bins_db[b]) + " dB done (" +
               std::to_string(sim.cfg.n_drops) + ")");
  }
  return pool;
}

// Per-bin placement statistics recorded in the run manifest.
inline nlohmann::ordered_json drop_pool_stats(const Simulation& sim, const DropPool& pool) {
  auto out = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < pool.bins.size(); ++b) {
    std::vector<double> g, attempts;
    for (const auto& d : pool.bins[b]) {
      g.push_back(d.gamma_hs_db);
      attempts.push_back(static_cast<double>(d.attempts));
    }
    const auto gm = mean_ci(g);
    const auto am = mean_ci(attempts);
    nlohmann::ordered_json o;
    o["gamma_db"] = std::stod(format_number(sim.cfg.gamma_bins_db[b]));
    o["n_drops"] = pool.bins[b].size();
    o["realized_gamma_mean_db"] = std::stod(format_number(gm.mean));
    o["realized_gamma_std_db"] = std::stod(format_number(gm.std));
    o["mean_attempts"] = std::stod(format_number(am.mean));
    o["acceptance_rate"] = std::stod(format_number(1.0 / am.mean));
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection accuracy versus training length

struct SelectionAccuracyRow {
  double gamma_db = 0.0;
  std::size_t rounds_k = 0;
  MeanCi accuracy;            // agreement with the angle-based element
  double dominant_agreement;  // agreement with the empirically dominant element
};

struct SelectionAccuracyResult {
  std::vector<SelectionAccuracyRow> rows;
  std::vector<double> sufficiency_by_bin;  // fraction of placements with a constant argmax
  std::size_t sufficiency_constant = 0;
  std::size_t sufficiency_total = 0;
  double truth_matches_dominant = 0.0;

  double sufficiency_rate() const {
    return sufficiency_total ? static_cast<double>(sufficiency_constant) / sufficiency_total : 0.0;
  }
  const SelectionAccuracyRow& at(double gamma, std::size_t k) const {
    for (const auto& r : rows)
      if (r.gamma_db == gamma && r.rounds_k == k) return r;
    throw InvalidArgument("SelectionAccuracyResult: no such row");
  }
};

namespace detail {

struct DropTrainingOutcome {
  std::vector<bool> correct;            // per rounds_grid entry
  std::vector<bool> matches_dominant;   // per rounds_grid entry
  bool truth_is_dominant = false;
  bool constant = false;
};

}  // namespace detail

inline SelectionAccuracyResult exp_selection_accuracy(const Simulation& sim, const DropPool& pool,
                                                      std::size_t workers,
                                                      const Progress& progress = {}) {
  const auto& cfg = sim.cfg;
  SelectionAccuracyResult res;
  std::size_t all_truth_dom = 0, all_n = 0;
  for (std::size_t b = 0; b < pool.bins.size(); ++b) {
    const auto& drops = pool.bins[b];
    auto outcomes = parallel_map<detail::DropTrainingOutcome>(
        drops.size(), workers, [&](std::size_t i) {
          const auto& d = drops[i];
          const auto tmpl = make_training(sim, d, sim.single_patch);
          detail::DropTrainingOutcome o;
          Rng ref_rng = make_rng(d.seed, Stream::kReference);
          const std::size_t dominant = run_training(tmpl, cfg.reference_rounds, ref_rng).chosen;
          for (std::size_t k : cfg.rounds_grid) {
            // Same stream per k: the k-round run is a prefix of longer runs.
            Rng rng = make_rng(d.seed, Stream::kTraining);
            const auto rec = run_training(tmpl, k, rng);
            o.correct.push_back(rec.correct);
            o.matches_dominant.push_back(rec.chosen == dominant);
          }
          o.truth_is_dominant = truth_element_by_angle(tmpl) == dominant;
          Rng suf_rng = make_rng(d.seed, Stream::kSufficiency);
          o.constant = single_round_choice_constant(tmpl, cfg.sufficiency_resamples, suf_rng);
          return o;
        });
    for (std::size_t ki = 0; ki < cfg.rounds_grid.size(); ++ki) {
      std::size_t ok = 0, dom = 0;
      for (const auto& o : outcomes) {
        ok += o.correct[ki];
        dom += o.matches_dominant[ki];
      }
      res.rows.push_back({cfg.gamma_bins_db[b], cfg.rounds_grid[ki],
                          proportion_ci(ok, outcomes.size()),
                          static_cast<double>(dom) / static_cast<double>(outcomes.size())});
    }
    std::size_t constant = 0;
    for (const auto& o : outcomes) {
      constant += o.constant;
      all_truth_dom += o.truth_is_dominant;
    }
    all_n += outcomes.size();
    res.sufficiency_constant += constant;
    res.sufficiency_total += outcomes.size();
    res.sufficiency_by_bin.push_back(static_cast<double>(constant) /
                                     static_cast<double>(outcomes.size()));
    if (progress)
      progress("selection-accuracy: bin " + format_number(cfg.gamma_bins_db[b]) + " dB done");
  }
  res.truth_matches_dominant = all_n ? static_cast<double>(all_truth_dom) / all_n : 0.0;
  return res;
}

inline ExperimentRecord to_record(const SelectionAccuracyResult& r, const ExperimentConfig& cfg) {
  ExperimentRecord rec;
  rec.id = "selection_accuracy";
  rec.fingerprint = config_fingerprint(cfg);
  rec.n_drops = cfg.n_drops;
  Table t{"selection_accuracy",
          {"gamma_db", "rounds_k", "n_drops", "accuracy", "ci95_low", "ci95_high"},
          {}};
  auto dominant = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    t.rows.push_back({row.gamma_db, static_cast<std::int64_t>(row.rounds_k),
                      static_cast<std::int64_t>(row.accuracy.n), row.accuracy.mean,
                      row.accuracy.ci95_low, row.accuracy.ci95_high});
    dominant.push_back({{"gamma_db", row.gamma_db},
                        {"rounds_k", row.rounds_k},
                        {"agreement", std::stod(format_number(row.dominant_agreement))}});
  }
  rec.tables.push_back(std::move(t));
  auto& ex = rec.extras;
  ex["single_round_sufficiency"] = {
      {"resamples_per_placement", cfg.sufficiency_resamples},
      {"placements", r.sufficiency_total},
      {"constant_placements", r.sufficiency_constant},
      {"rate", std::stod(format_number(r.sufficiency_rate()))}};
  auto by_bin = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < r.sufficiency_by_bin.size(); ++b)
    by_bin.push_back({{"gamma_db", cfg.gamma_bins_db[b]},
                      {"rate", std::stod(format_number(r.sufficiency_by_bin[b]))}});
  ex["single_round_sufficiency"]["by_bin"] = std::move(by_bin);
  ex["agreement_with_dominant_element"] = std::move(dominant);
  ex["angle_truth_matches_dominant"] = std::stod(format_number(r.truth_matches_dominant));
  return rec;
}

// ---------------------------------------------------------------------------
// T-test training length

struct TTestRow {
  double gamma_db = 0.0;
  double mean_rounds = 0.0;
  double std_rounds = 0.0;
  std::size_t n_reached = 0;
  std::size_t n_not_reached = 0;
};

struct TTestResult {
  std::vector<TTestRow> rows;
  // rounds_needed per bin and drop; 0 = not reached
  std::vector<std::vector<std::size_t>> per_drop;
};

inline TTestResult exp_ttest_rounds(const Simulation& sim, const DropPool& pool,
                                    std::size_t workers, const Progress& progress = {}) {
  const auto& cfg = sim.cfg;
  TTestResult res;
  for (std::size_t b = 0; b < pool.bins.size(); ++b) {
    const auto& drops = pool.bins[b];
    auto needed = parallel_map<std::size_t>(drops.size(), workers, [&](std::size_t i) {
      const auto tmpl = make_training(sim, drops[i], sim.single_patch);
      Rng rng = make_rng(drops[i].seed, Stream::kTTest);
      const auto out = rounds_to_significance(tmpl, cfg.alpha, cfg.max_rounds, rng, cfg.ttest_compare);
      return out.rounds_needed.value_or(0);
    });
    TTestRow row;
    row.gamma_db = cfg.gamma_bins_db[b];
    std::vector<double> reached;
    for (auto n : needed)
      if (n) reached.push_back(static_cast<double>(n));
    row.n_reached = reached.size();
    row.n_not_reached = needed.size() - reached.size();
    if (!reached.empty()) {
      const auto m = mean_ci(reached);
      row.mean_rounds = m.mean;
      row.std_rounds = m.std;
    } else {
      row.mean_rounds = std::nan("");
      row.std_rounds = std::nan("");
    }
    res.rows.push_back(row);
    res.per_drop.push_back(std::move(needed));
    if (progress) progress("ttest-rounds: bin " + format_number(cfg.gamma_bins_db[b]) + " dB done");
  }
  return res;
}

inline ExperimentRecord to_record(const TTestResult& r, const ExperimentConfig& cfg) {
  ExperimentRecord rec;
  rec.id = "ttest_rounds";
  rec.fingerprint = config_fingerprint(cfg);
  rec.n_drops = cfg.n_drops;
  Table t{"ttest_rounds", {"gamma_db", "mean_rounds", "std_rounds", "n_reached", "n_not_reached"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({row.gamma_db, row.mean_rounds, row.std_rounds,
                      static_cast<std::int64_t>(row.n_reached),
                      static_cast<std::int64_t>(row.n_not_reached)});
  rec.tables.push_back(std::move(t));
  return rec;
}

// ---------------------------------------------------------------------------
// Served UEs per antenna configuration

enum class SbsAntenna { kOda, kMea, kFixed };

inline const char* antenna_name(SbsAntenna a) {
  switch (a) {
    case SbsAntenna::kOda: return "oda";
    case SbsAntenna::kMea: return "mea";
    case SbsAntenna::kFixed: return "fixed";
  }
  return "?";
}

enum class PatchKind { kNone, kSingle, kDouble };

inline const char* patch_name(PatchKind p) {
  switch (p) {
    case PatchKind::kNone: return "none";
    case PatchKind::kSingle: return "single";
    case PatchKind::kDouble: return "double";
  }
  return "?";
}

struct AntennaSetup {
  SbsAntenna antenna = SbsAntenna::kOda;
  PatchKind patch = PatchKind::kNone;
  std::optional<double> misalignment_deg;
};

// Expands the configured names into concrete setups, in output order.
inline std::vector<AntennaSetup> served_ue_setups(const ExperimentConfig& cfg) {
  auto has = [&](const char* n) {
    return std::find(cfg.antenna_configs.begin(), cfg.antenna_configs.end(), n) !=
           cfg.antenna_configs.end();
  };
  std::vector<double> mis = cfg.misalignments_deg;
  std::sort(mis.begin(), mis.end());
  mis.erase(std::unique(mis.begin(), mis.end()), mis.end());
  std::vector<AntennaSetup> out;
  if (has("oda")) out.push_back({SbsAntenna::kOda, PatchKind::kNone, std::nullopt});
  if (has("mea_single")) out.push_back({SbsAntenna::kMea, PatchKind::kSingle, std::nullopt});
  if (has("mea_double")) out.push_back({SbsAntenna::kMea, PatchKind::kDouble, std::nullopt});
  for (auto [name, kind] : {std::pair{"fixed_single", PatchKind::kSingle},
                            std::pair{"fixed_double", PatchKind::kDouble}})
    if (has(name))
      for (double m : mis) out.push_back({SbsAntenna::kFixed, kind, m});
  return out;
}

struct SetupOutcome {
  std::size_t served = 0;
  double total_bps = 0.0;
  std::vector<double> rates_bps;
};

// Evaluates one antenna setup on a drop. MEA picks its element by served count.
inline SetupOutcome evaluate_setup(const Simulation& sim, const DropScenario& d,
                                   const AntennaSetup& s, bool want_rates) {
  const AntennaPattern& patch = s.patch == PatchKind::kDouble ? sim.double_patch : sim.single_patch;
  std::optional<AntennaPattern> pattern;
  switch (s.antenna) {
    case SbsAntenna::kOda:
      pattern = AntennaPattern::omni(sim.radio.omni_gain_dbi);
      break;
    case SbsAntenna::kMea: {
      const MeaConfig mea = make_mea(d, patch);
      const Scene base = make_scene(sim, d, std::nullopt);
      const auto counts = element_served_counts(base, mea);
      pattern = mea.element_pattern(argmax_first<std::size_t>(counts));
      break;
    }
    case SbsAntenna::kFixed:
      pattern = patch.pointed(bearing_deg(d.scbs_pos, d.hotspot.center) + s.misalignment_deg.value_or(0));
      break;
  }
  const Scene scene = make_scene(sim, d, pattern);
  SetupOutcome out;
  if (!want_rates) {
    out.served = scene_served_count(scene);
    return out;
  }
  const LinkState st = evaluate_scene(scene);
  out.served = st.served;
  out.total_bps = st.total_bps;
  out.rates_bps = st.rates_bps;
  return out;
}

struct ServedUesRow {
  double gamma_db = 0.0;
  AntennaSetup setup;
  MeanCi served;
};

struct ServedUesResult {
  std::vector<ServedUesRow> rows;

  const ServedUesRow& find(double gamma, SbsAntenna a, PatchKind p,
                           std::optional<double> mis = std::nullopt) const {
    for (const auto& r : rows)
      if (r.gamma_db == gamma && r.setup.antenna == a && r.setup.patch == p &&
          r.setup.misalignment_deg == mis)
        return r;
    throw InvalidArgument("ServedUesResult: no such row");
  }
};

inline ServedUesResult exp_served_ues(const Simulation& sim, const DropPool& pool,
                                      std::size_t workers, const Progress& progress = {}) {
  const auto setups = served_ue_setups(sim.cfg);
  ServedUesResult res;
  for (std::size_t b = 0; b < pool.bins.size(); ++b) {
    const auto& drops = pool.bins[b];
    auto per_drop = parallel_map<std::vector<double>>(drops.size(), workers, [&](std::size_t i) {
      std::vector<double> v;
      v.reserve(setups.size());
      for (const auto& s : setups)
        v.push_back(static_cast<double>(evaluate_setup(sim, drops[i], s, false).served));
      return v;
    });
    for (std::size_t s = 0; s < setups.size(); ++s) {
      std::vector<double> samples;
      samples.reserve(per_drop.size());
      for (const auto& v : per_drop) samples.push_back(v[s]);
      res.rows.push_back({sim.cfg.gamma_bins_db[b], setups[s], mean_ci(samples)});
    }
    if (progress) progress("served-ues: bin " + format_number(sim.cfg.gamma_bins_db[b]) + " dB done");
  }
  return res;
}

// Misalignment at which the fixed antenna's mean served count first drops
// below `mea_mean`, by linear interpolation over the sweep. Empty when the
// fixed curve never crosses.
inline std::optional<double> crossover_misalignment(std::vector<std::pair<double, double>> sweep,
                                                    double mea_mean) {
  std::sort(sweep.begin(), sweep.end());
  if (sweep.empty()) return std::nullopt;
  if (sweep.front().second < mea_mean) return sweep.front().first;
  for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
    const auto [m0, f0] = sweep[i];
    const auto [m1, f1] = sweep[i + 1];
    if (f0 >= mea_mean && f1 < mea_mean) return m0 + (f0 - mea_mean) * (m1 - m0) / (f0 - f1);
  }
  return std::nullopt;
}

// Crossover on the curve averaged over all gamma bins.
inline std::optional<double> pooled_crossover(const ServedUesResult& r,
                                              const std::vector<double>& bins, PatchKind patch) {
  std::map<double, double> fixed_sum;
  double mea_sum = 0.0;
  for (const auto& row : r.rows) {
    if (std::find(bins.begin(), bins.end(), row.gamma_db) == bins.end()) continue;
    if (row.setup.patch != patch) continue;
    if (row.setup.antenna == SbsAntenna::kMea) mea_sum += row.served.mean;
    if (row.setup.antenna == SbsAntenna::kFixed && *row.setup.misalignment_deg <= 90.0)
      fixed_sum[*row.setup.misalignment_deg] += row.served.mean;
  }
  std::vector<std::pair<double, double>> sweep(fixed_sum.begin(), fixed_sum.end());
  return crossover_misalignment(sweep, mea_sum);
}

inline std::optional<double> bin_crossover(const ServedUesResult& r, double gamma, PatchKind patch) {
  std::vector<std::pair<double, double>> sweep;
  double mea = std::nan("");
  for (const auto& row : r.rows) {
    if (row.gamma_db != gamma || row.setup.patch != patch) continue;
    if (row.setup.antenna == SbsAntenna::kMea) mea = row.served.mean;
    if (row.setup.antenna == SbsAntenna::kFixed && *row.setup.misalignment_deg <= 90.0)
      sweep.emplace_back(*row.setup.misalignment_deg, row.served.mean);
  }
  if (std::isnan(mea)) return std::nullopt;
  return crossover_misalignment(sweep, mea);
}

inline ExperimentRecord to_record(const ServedUesResult& r, const ExperimentConfig& cfg) {
  ExperimentRecord rec;
  rec.id = "served_ues";
  rec.fingerprint = config_fingerprint(cfg);
  rec.n_drops = cfg.n_drops;
  Table t{"served_ues",
          {"gamma_db", "config", "patch_kind", "misalignment_deg", "mean_served", "ci95_low",
           "ci95_high", "n_drops"},
          {}};
  for (const auto& row : r.rows)
    t.rows.push_back({row.gamma_db, std::string(antenna_name(row.setup.antenna)),
                      std::string(patch_name(row.setup.patch)),
                      row.setup.misalignment_deg ? Cell{*row.setup.misalignment_deg}
                                                 : Cell{std::string("na")},
                      row.served.mean, row.served.ci95_low, row.served.ci95_high,
                      static_cast<std::int64_t>(row.served.n)});
  rec.tables.push_back(std::move(t));

  // gnuplot layout: one line per gamma, one column per setup
  const auto setups = served_ue_setups(cfg);
  std::string dat = "# gamma_db";
  for (const auto& s : setups) {
    dat += std::string(" ") + antenna_name(s.antenna) + "_" + patch_name(s.patch);
    if (s.misalignment_deg) dat += "_" + format_number(*s.misalignment_deg);
  }
  dat += "\n";
  for (double g : cfg.gamma_bins_db) {
    dat += format_number(g);
    for (const auto& row : r.rows)
      if (row.gamma_db == g) dat += " " + format_number(row.served.mean);
    dat += "\n";
  }
  rec.attachments.emplace_back("served_ues.dat", std::move(dat));

  auto cross = nlohmann::ordered_json::object();
  for (auto p : {PatchKind::kSingle, PatchKind::kDouble}) {
    nlohmann::ordered_json o;
    const auto pooled = pooled_crossover(r, cfg.gamma_bins_db, p);
    o["pooled_deg"] = pooled ? nlohmann::ordered_json(std::stod(format_number(*pooled)))
                              : nlohmann::ordered_json(nullptr);
    auto per = nlohmann::ordered_json::array();
    for (double g : cfg.gamma_bins_db) {
      const auto c = bin_crossover(r, g, p);
      per.push_back({{"gamma_db", g},
                     {"crossover_deg", c ? nlohmann::ordered_json(std::stod(format_number(*c)))
                                         : nlohmann::ordered_json(nullptr)}});
    }
    o["by_bin"] = std::move(per);
    cross[patch_name(p)] = std::move(o);
  }
  rec.extras["fixed_vs_mea_crossover"] = std::move(cross);
  return rec;
}

// ---------------------------------------------------------------------------
// Per-UE rate CDFs at one gamma bin

struct RateSeries {
  std::string config;
  PatchKind patch = PatchKind::kNone;
  CdfSeries cdf;
  MeanCi total;
  double gain_over_oda_pct = 0.0;
};

struct RateCdfResult {
  double gamma_db = 0.0;
  std::vector<RateSeries> series;

  const RateSeries& find(const std::string& config, PatchKind p) const {
    for (const auto& s : series)
      if (s.config == config && s.patch == p) return s;
    throw InvalidArgument("RateCdfResult: no such series");
  }
};

inline RateCdfResult exp_rate_cdf(const Simulation& sim, const DropPool& pool, std::size_t workers,
                                  const Progress& progress = {}) {
  const auto& bins = sim.cfg.gamma_bins_db;
  const auto it = std::find(bins.begin(), bins.end(), sim.cfg.rate_bin_db);
  if (it == bins.end()) throw ConfigError("rate_bin_db must be one of gamma_bins_db", "rate_bin_db");
  const auto& drops = pool.bins[static_cast<std::size_t>(it - bins.begin())];

  struct Entry {
    std::string name;
    PatchKind patch;
    std::optional<AntennaSetup> setup;  // empty: macro only
  };
  const std::vector<Entry> entries{
      {"macro_only", PatchKind::kNone, std::nullopt},
      {"oda", PatchKind::kNone, AntennaSetup{SbsAntenna::kOda, PatchKind::kNone, std::nullopt}},
      {"mea", PatchKind::kSingle, AntennaSetup{SbsAntenna::kMea, PatchKind::kSingle, std::nullopt}},
      {"fixed", PatchKind::kSingle, AntennaSetup{SbsAntenna::kFixed, PatchKind::kSingle, 0.0}},
      {"mea", PatchKind::kDouble, AntennaSetup{SbsAntenna::kMea, PatchKind::kDouble, std::nullopt}},
  };

  auto per_drop = parallel_map<std::vector<SetupOutcome>>(drops.size(), workers, [&](std::size_t i) {
    std::vector<SetupOutcome> v;
    for (const auto& e : entries) {
      if (e.setup) {
        v.push_back(evaluate_setup(sim, drops[i], *e.setup, true));
      } else {
        const LinkState st = evaluate_scene(make_scene(sim, drops[i], std::nullopt));
        v.push_back({0, st.total_bps, st.rates_bps});
      }
    }
    return v;
  });

  RateCdfResult res;
  res.gamma_db = sim.cfg.rate_bin_db;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<double> rates, totals;
    for (const auto& v : per_drop) {
      rates.insert(rates.end(), v[e].rates_bps.begin(), v[e].rates_bps.end());
      totals.push_back(v[e].total_bps);
    }
    res.series.push_back({entries[e].name, entries[e].patch, empirical_cdf(rates), mean_ci(totals), 0});
  }
  const double oda = res.find("oda", PatchKind::kNone).total.mean;
  for (auto& s : res.series) s.gain_over_oda_pct = 100.0 * (s.total.mean / oda - 1.0);
  if (progress) progress("rate-cdf: bin " + format_number(res.gamma_db) + " dB done");
  return res;
}

inline ExperimentRecord to_record(const RateCdfResult& r, const ExperimentConfig& cfg) {
  ExperimentRecord rec;
  rec.id = "rate_cdf";
  rec.fingerprint = config_fingerprint(cfg);
  rec.n_drops = cfg.n_drops;
  Table cdf{"rate_cdf", {"config", "patch_kind", "rate_bps", "cdf"}, {}};
  Table totals{"totals", {"config", "patch_kind", "mean_total_rate_bps", "gain_over_oda_pct"}, {}};
  std::string dat;
  for (const auto& s : r.series) {
    dat += "# " + s.config + " " + patch_name(s.patch) + "\n";
    for (std::size_t i = 0; i < s.cdf.values.size(); ++i) {
      cdf.rows.push_back({s.config, std::string(patch_name(s.patch)), s.cdf.values[i], s.cdf.probs[i]});
      dat += format_number(s.cdf.values[i]) + " " + format_number(s.cdf.probs[i]) + "\n";
    }
    dat += "\n\n";
    totals.rows.push_back({s.config, std::string(patch_name(s.patch)), s.total.mean, s.gain_over_oda_pct});
    rec.cdfs.push_back(s.cdf);
  }
  rec.tables.push_back(std::move(cdf));
  rec.tables.push_back(std::move(totals));
  rec.attachments.emplace_back("rate_cdf.dat", std::move(dat));
  rec.extras["rate_bin_db"] = r.gamma_db;
  return rec;
}

}  // namespace mea
