#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "mea/errors.hpp"
#include "mea/geometry.hpp"

namespace mea {

enum class PatternKind { kOmni, kPatch, kMacroSector };

// Azimuth-only parabolic pattern: peak - min(12 (delta/hpbw)^2, front_to_back).
struct AntennaPattern {
  PatternKind kind = PatternKind::kOmni;
  double peak_gain_dbi = 0.0;
  double hpbw_deg = 360.0;
  double front_to_back_db = 0.0;
  double boresight_deg = 0.0;

  static AntennaPattern omni(double gain_dbi = 0.0) {
    return {PatternKind::kOmni, gain_dbi, 360.0, 0.0, 0.0};
  }
  static AntennaPattern patch(double gain_dbi, double hpbw_deg, double f2b_db,
                              double boresight_deg = 0.0) {
    return validated({PatternKind::kPatch, gain_dbi, hpbw_deg, f2b_db, boresight_deg});
  }
  static AntennaPattern macro_sector(double gain_dbi, double hpbw_deg, double f2b_db,
                                     double boresight_deg = 0.0) {
    return validated({PatternKind::kMacroSector, gain_dbi, hpbw_deg, f2b_db, boresight_deg});
  }

  AntennaPattern pointed(double boresight) const {
    AntennaPattern p = *this;
    p.boresight_deg = wrap_deg(boresight);
    return p;
  }

 private:
  static AntennaPattern validated(AntennaPattern p) {
    if (!(p.hpbw_deg > 0.0 && p.hpbw_deg < 360.0))
      throw InvalidArgument("AntennaPattern: hpbw must lie in (0, 360)");
    if (!(p.front_to_back_db >= 0.0))
      throw InvalidArgument("AntennaPattern: front-to-back ratio must be >= 0");
    p.boresight_deg = wrap_deg(p.boresight_deg);
    return p;
  }
};

inline double pattern_gain_db(const AntennaPattern& p, double azimuth_deg) {
  if (p.kind == PatternKind::kOmni) return p.peak_gain_dbi;
  const double delta = angular_distance_deg(azimuth_deg, p.boresight_deg);
  const double ratio = delta / p.hpbw_deg;
  return p.peak_gain_dbi - std::min(12.0 * ratio * ratio, p.front_to_back_db);
}

inline constexpr std::size_t kMeaElements = 4;

// Four identical elements at install_offset + {0, 90, 180, 270}; one active.
struct MeaConfig {
  AntennaPattern element;
  double install_offset_deg = 0.0;
  std::size_t active_element = 0;

  double boresight(std::size_t i) const {
    if (i >= kMeaElements) throw InvalidArgument("MeaConfig: element index out of range");
    return wrap_deg(install_offset_deg + 90.0 * static_cast<double>(i));
  }
  AntennaPattern element_pattern(std::size_t i) const { return element.pointed(boresight(i)); }
  AntennaPattern active_pattern() const { return element_pattern(active_element); }

  std::array<AntennaPattern, kMeaElements> elements() const {
    return {element_pattern(0), element_pattern(1), element_pattern(2), element_pattern(3)};
  }
};

enum class PathlossKind { kMacroUma, kSmallcellOutdoor };

// loss = intercept + slope * log10(d / 1 km)
struct PathlossModel {
  PathlossKind kind = PathlossKind::kMacroUma;
  double intercept_db = 128.1;
  double slope_db = 37.6;

  static PathlossModel macro_uma(double intercept = 128.1, double slope = 37.6) {
    return validated({PathlossKind::kMacroUma, intercept, slope});
  }
  static PathlossModel smallcell_outdoor(double intercept = 140.7, double slope = 36.7) {
    return validated({PathlossKind::kSmallcellOutdoor, intercept, slope});
  }

 private:
  static PathlossModel validated(PathlossModel m) {
    if (!(m.slope_db > 0.0)) throw InvalidArgument("PathlossModel: slope must be positive");
    return m;
  }
};

inline constexpr double kMinLinkDistanceM = 10.0;

inline double pathloss_db(const PathlossModel& m, double distance_m) {
  if (!(distance_m >= kMinLinkDistanceM))
    throw InvalidArgument("pathloss_db: distance " + std::to_string(distance_m) +
                          " m is below the 10 m model floor");
  return m.intercept_db + m.slope_db * std::log10(distance_m / 1000.0);
}

inline double rx_power_dbm(double tx_power_dbm, double tx_gain_db, double pl_db) {
  return tx_power_dbm + tx_gain_db - pl_db;
}

inline double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) throw InvalidArgument("thermal_noise_dbm: bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

}  // namespace mea
