#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mea/errors.hpp"
#include "mea/geometry.hpp"
#include "mea/propagation.hpp"

namespace mea {

struct Transmitter {
  std::size_t id = 0;
  Point2D position;
  double tx_power_dbm = 0.0;
  AntennaPattern pattern;
  PathlossModel pathloss;
  bool is_scbs = false;
};

// Received power in dBm, row-major (ue, transmitter).
class RxPowerMap {
 public:
  RxPowerMap(std::size_t n_ues, std::size_t n_tx)
      : n_ues_(n_ues), n_tx_(n_tx), dbm_(n_ues * n_tx, 0.0) {}

  std::size_t n_ues() const { return n_ues_; }
  std::size_t n_transmitters() const { return n_tx_; }

  double at(std::size_t ue, std::size_t tx) const { return dbm_[ue * n_tx_ + tx]; }
  double& at(std::size_t ue, std::size_t tx) { return dbm_[ue * n_tx_ + tx]; }

  std::span<const double> row(std::size_t ue) const {
    return std::span<const double>(dbm_).subspan(ue * n_tx_, n_tx_);
  }

 private:
  std::size_t n_ues_;
  std::size_t n_tx_;
  std::vector<double> dbm_;
};

// Link budget for one (transmitter, receiver) pair. Distances below the
// pathloss floor are evaluated at the floor (minimum coupling distance).
inline double link_rx_dbm(const Transmitter& t, Point2D rx) {
  const double d = distance(t.position, rx);
  const double gain =
      d > 0.0 ? pattern_gain_db(t.pattern, bearing_deg(t.position, rx)) : t.pattern.peak_gain_dbi;
  return rx_power_dbm(t.tx_power_dbm, gain,
                      pathloss_db(t.pathloss, std::max(d, kMinLinkDistanceM)));
}

// `shadowing_db`, when non-empty, is an n_ues x n_tx row-major matrix added
// to every entry.
inline RxPowerMap rx_power_map(std::span<const Point2D> ues, std::span<const Transmitter> txs,
                               std::span<const double> shadowing_db = {}) {
  if (ues.empty() || txs.empty()) throw InvalidArgument("rx_power_map: empty input");
  if (!shadowing_db.empty() && shadowing_db.size() != ues.size() * txs.size())
    throw InvalidArgument("rx_power_map: shadowing matrix has the wrong shape");
  RxPowerMap map(ues.size(), txs.size());
  for (std::size_t u = 0; u < ues.size(); ++u)
    for (std::size_t t = 0; t < txs.size(); ++t) {
      double v = link_rx_dbm(txs[t], ues[u]);
      if (!shadowing_db.empty()) v += shadowing_db[u * txs.size() + t];
      map.at(u, t) = v;
    }
  return map;
}

// Strongest macro column for one UE; ties go to the lowest column.
inline std::size_t best_macro(const RxPowerMap& map, std::size_t ue,
                              std::optional<std::size_t> scbs_col) {
  std::size_t best = map.n_transmitters();
  for (std::size_t t = 0; t < map.n_transmitters(); ++t) {
    if (scbs_col && t == *scbs_col) continue;
    if (best == map.n_transmitters() || map.at(ue, t) > map.at(ue, best)) best = t;
  }
  if (best == map.n_transmitters()) throw InvalidArgument("associate: no macro transmitter");
  return best;
}

// SCBS serves a UE iff its power strictly exceeds the best macro's.
inline std::vector<std::size_t> associate(const RxPowerMap& map,
                                          std::optional<std::size_t> scbs_col) {
  if (scbs_col && *scbs_col >= map.n_transmitters())
    throw InvalidArgument("associate: SCBS column out of range");
  std::vector<std::size_t> servers(map.n_ues());
  for (std::size_t u = 0; u < map.n_ues(); ++u) {
    const std::size_t m = best_macro(map, u, scbs_col);
    servers[u] = (scbs_col && map.at(u, *scbs_col) > map.at(u, m)) ? *scbs_col : m;
  }
  return servers;
}

inline std::size_t served_count(const RxPowerMap& map, std::size_t scbs_col) {
  const auto servers = associate(map, scbs_col);
  return static_cast<std::size_t>(std::count(servers.begin(), servers.end(), scbs_col));
}

// Full-buffer SINR: every transmitter other than the server interferes.
inline double ue_sinr_db(const RxPowerMap& map, std::span<const std::size_t> servers,
                         std::size_t ue, double noise_dbm) {
  double interference_mw = dbm_to_mw(noise_dbm);
  for (std::size_t t = 0; t < map.n_transmitters(); ++t)
    if (t != servers[ue]) interference_mw += dbm_to_mw(map.at(ue, t));
  return map.at(ue, servers[ue]) - mw_to_dbm(interference_mw);
}

// min(bw_eff * B * log2(1 + sinr / sinr_eff), B * se_cap)
struct ShannonParams {
  double bw_eff = 0.56;
  double sinr_eff = 2.0;
  double se_cap_bps_per_hz = 4.4;
};

inline double capacity_bps(double sinr_db, double bandwidth_hz, const ShannonParams& p) {
  if (!(bandwidth_hz > 0.0)) throw InvalidArgument("capacity_bps: bandwidth must be positive");
  const double sinr = std::pow(10.0, sinr_db / 10.0);
  const double shannon = p.bw_eff * bandwidth_hz * std::log2(1.0 + sinr / p.sinr_eff);
  return std::min(shannon, bandwidth_hz * p.se_cap_bps_per_hz);
}

// Equal-time round robin within each cell.
inline std::vector<double> ue_rates(std::span<const std::size_t> servers,
                                    std::span<const double> sinrs_db, double bandwidth_hz,
                                    const ShannonParams& p) {
  if (servers.size() != sinrs_db.size())
    throw InvalidArgument("ue_rates: servers and SINRs differ in length");
  std::size_t n_cells = 0;
  for (auto s : servers) n_cells = std::max(n_cells, s + 1);
  std::vector<std::size_t> load(n_cells, 0);
  for (auto s : servers) ++load[s];
  std::vector<double> rates(servers.size());
  for (std::size_t u = 0; u < servers.size(); ++u)
    rates[u] = capacity_bps(sinrs_db[u], bandwidth_hz, p) / static_cast<double>(load[servers[u]]);
  return rates;
}

inline double total_throughput(std::span<const double> rates) {
  return std::accumulate(rates.begin(), rates.end(), 0.0);
}

// Everything needed to build the transmitter list of a drop.
struct RadioParams {
  double macro_tx_power_dbm = 46.0;
  double scbs_tx_power_dbm = 20.0;
  double bandwidth_hz = 10e6;
  double noise_figure_db = 9.0;
  AntennaPattern macro_pattern = AntennaPattern::macro_sector(14.0, 70.0, 25.0);
  PathlossModel macro_pathloss = PathlossModel::macro_uma();
  PathlossModel scbs_pathloss = PathlossModel::smallcell_outdoor();
  double omni_gain_dbi = 0.0;
  ShannonParams shannon;

  double noise_dbm() const { return thermal_noise_dbm(bandwidth_hz, noise_figure_db); }
};

inline std::vector<Transmitter> macro_transmitters(const NetworkLayout& layout,
                                                   const RadioParams& radio) {
  std::vector<Transmitter> txs;
  txs.reserve(layout.n_sectors());
  for (std::size_t i = 0; i < layout.n_sectors(); ++i) {
    const Sector& s = layout.sectors[i];
    txs.push_back({i, layout.sites[s.site], radio.macro_tx_power_dbm,
                   radio.macro_pattern.pointed(s.boresight_deg), radio.macro_pathloss, false});
  }
  return txs;
}

// A placed drop. `scbs_pattern` empty means no small cell (macro only).
struct Scene {
  std::vector<Transmitter> macros;
  Point2D scbs_position;
  std::optional<AntennaPattern> scbs_pattern;
  Hotspot hotspot;
  UePopulation ues;
  std::vector<double> shadowing_db;  // n_ues x (n_macros + 1), SCBS last; may be empty
  RadioParams radio;

  Transmitter scbs_transmitter(const AntennaPattern& pattern) const {
    return {macros.size(), scbs_position, radio.scbs_tx_power_dbm, pattern, radio.scbs_pathloss,
            true};
  }

  Scene with_pattern(std::optional<AntennaPattern> p) const {
    Scene s = *this;
    s.scbs_pattern = std::move(p);
    return s;
  }
};

// SINR at the hotspot centre from an omni SCBS against all macro sectors.
inline double gamma_hs_db(std::span<const Transmitter> macros, Point2D scbs_position,
                          Point2D hotspot_center, const RadioParams& radio) {
  const Transmitter scbs{macros.size(), scbs_position, radio.scbs_tx_power_dbm,
                         AntennaPattern::omni(radio.omni_gain_dbi), radio.scbs_pathloss, true};
  double interference_mw = dbm_to_mw(radio.noise_dbm());
  for (const auto& m : macros) interference_mw += dbm_to_mw(link_rx_dbm(m, hotspot_center));
  return link_rx_dbm(scbs, hotspot_center) - mw_to_dbm(interference_mw);
}

inline double gamma_hs_db(const Scene& scene) {
  return gamma_hs_db(scene.macros, scene.scbs_position, scene.hotspot.center, scene.radio);
}

// Per-UE outcome of one scene evaluation.
struct LinkState {
  RxPowerMap map{0, 0};
  std::optional<std::size_t> scbs_col;
  std::vector<std::size_t> servers;
  std::vector<double> sinr_db;
  std::vector<double> rates_bps;
  std::size_t served = 0;
  double total_bps = 0.0;
};

inline LinkState evaluate_scene(const Scene& scene) {
  std::vector<Transmitter> txs = scene.macros;
  LinkState st;
  std::vector<double> shadowing;
  if (scene.scbs_pattern) {
    txs.push_back(scene.scbs_transmitter(*scene.scbs_pattern));
    st.scbs_col = txs.size() - 1;
    shadowing = scene.shadowing_db;
  } else if (!scene.shadowing_db.empty()) {
    // drop the SCBS column
    const std::size_t w = scene.macros.size() + 1;
    for (std::size_t u = 0; u < scene.ues.size(); ++u)
      for (std::size_t t = 0; t + 1 < w; ++t) shadowing.push_back(scene.shadowing_db[u * w + t]);
  }
  st.map = rx_power_map(scene.ues.positions, txs, shadowing);
  st.servers = associate(st.map, st.scbs_col);
  const double noise = scene.radio.noise_dbm();
  st.sinr_db.resize(scene.ues.size());
  for (std::size_t u = 0; u < scene.ues.size(); ++u)
    st.sinr_db[u] = ue_sinr_db(st.map, st.servers, u, noise);
  st.rates_bps = ue_rates(st.servers, st.sinr_db, scene.radio.bandwidth_hz, scene.radio.shannon);
  st.total_bps = total_throughput(st.rates_bps);
  if (st.scbs_col)
    st.served = static_cast<std::size_t>(
        std::count(st.servers.begin(), st.servers.end(), *st.scbs_col));
  return st;
}

// Served count only; skips SINR and rate work.
inline std::size_t scene_served_count(const Scene& scene) {
  if (!scene.scbs_pattern) return 0;
  std::vector<Transmitter> txs = scene.macros;
  txs.push_back(scene.scbs_transmitter(*scene.scbs_pattern));
  return served_count(rx_power_map(scene.ues.positions, txs, scene.shadowing_db), txs.size() - 1);
}

// Rigid rotation of every position and boresight about `center`.
inline Scene rotate_scene(const Scene& scene, Point2D center, double deg) {
  Scene s = scene;
  for (auto& m : s.macros) {
    m.position = rotate_about(m.position, center, deg);
    m.pattern.boresight_deg = wrap_deg(m.pattern.boresight_deg + deg);
  }
  s.scbs_position = rotate_about(s.scbs_position, center, deg);
  if (s.scbs_pattern) s.scbs_pattern->boresight_deg = wrap_deg(s.scbs_pattern->boresight_deg + deg);
  s.hotspot.center = rotate_about(s.hotspot.center, center, deg);
  for (auto& p : s.ues.positions) p = rotate_about(p, center, deg);
  return s;
}

}  // namespace mea
