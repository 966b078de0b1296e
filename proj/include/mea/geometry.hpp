#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "mea/errors.hpp"
#include "mea/random.hpp"

namespace mea {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;

inline double deg2rad(double deg) { return deg / kDegPerRad; }
inline double rad2deg(double rad) { return rad * kDegPerRad; }

// Wraps any angle into [0, 360).
inline double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(const Point2D&, const Point2D&) = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2D a, Point2D b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline Point2D polar(Point2D origin, double radius, double bearing) {
  const double r = deg2rad(bearing);
  return {origin.x + radius * std::cos(r), origin.y + radius * std::sin(r)};
}

inline Point2D rotate_about(Point2D p, Point2D center, double deg) {
  const double r = deg2rad(deg);
  const double c = std::cos(r), s = std::sin(r);
  const Point2D d = p - center;
  return {center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y};
}

// Counter-clockwise angle of (to - from) measured from +x, in [0, 360).
inline double bearing_deg(Point2D from, Point2D to) {
  if (from == to) throw InvalidArgument("bearing_deg: coincident points");
  return wrap_deg(rad2deg(std::atan2(to.y - from.y, to.x - from.x)));
}

// Minimal absolute circular difference, in [0, 180].
inline double angular_distance_deg(double a, double b) {
  const double d = wrap_deg(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

// Signed difference a - b folded into (-180, 180].
inline double signed_angle_deg(double a, double b) {
  const double d = wrap_deg(a - b);
  return d > 180.0 ? d - 360.0 : d;
}

struct Sector {
  std::size_t site = 0;
  double boresight_deg = 0.0;
};

// Central tri-sector site plus one ring of six.
struct NetworkLayout {
  double isd = 0.0;
  std::vector<Point2D> sites;
  std::vector<Sector> sectors;

  std::size_t n_sites() const { return sites.size(); }
  std::size_t n_sectors() const { return sectors.size(); }
};

inline constexpr std::array<double, 3> kSectorBoresights{30.0, 150.0, 270.0};

inline NetworkLayout build_layout(double isd, double boresight_offset_deg = 0.0) {
  if (!(isd > 0.0) || !std::isfinite(isd))
    throw InvalidArgument("build_layout: isd must be positive, got " + std::to_string(isd));
  NetworkLayout layout;
  layout.isd = isd;
  layout.sites.push_back({0.0, 0.0});
  for (int k = 0; k < 6; ++k) layout.sites.push_back(polar({0.0, 0.0}, isd, 60.0 * k));
  for (std::size_t s = 0; s < layout.sites.size(); ++s)
    for (double b : kSectorBoresights)
      layout.sectors.push_back({s, wrap_deg(b + boresight_offset_deg)});
  return layout;
}

// Hexagonal cell of a site: flat sides face the six neighbours (apothem isd/2).
inline bool in_hex_cell(const NetworkLayout& layout, std::size_t site, Point2D p) {
  const Point2D d = p - layout.sites.at(site);
  const double apothem = 0.5 * layout.isd;
  for (int k = 0; k < 6; ++k) {
    const double r = deg2rad(60.0 * k);
    if (d.x * std::cos(r) + d.y * std::sin(r) > apothem + 1e-9) return false;
  }
  return true;
}

// 120-degree wedge centred on the sector boresight, half-open (-60, 60].
inline bool in_sector_wedge(const NetworkLayout& layout, std::size_t sector, Point2D p) {
  const Sector& s = layout.sectors.at(sector);
  const Point2D site = layout.sites[s.site];
  if (p == site) return false;
  const double rel = signed_angle_deg(bearing_deg(site, p), s.boresight_deg);
  return rel > -60.0 && rel <= 60.0;
}

inline constexpr int kMaxSectorSamplingTries = 10'000;

namespace detail {

template <typename Accept>
Point2D sample_in_cell(const NetworkLayout& layout, std::size_t site, Rng& rng, Accept&& accept,
                       const char* what) {
  const Point2D c = layout.sites.at(site);
  const double circumradius = layout.isd / std::sqrt(3.0);
  for (int i = 0; i < kMaxSectorSamplingTries; ++i) {
    const Point2D p{c.x + uniform(rng, -circumradius, circumradius),
                    c.y + uniform(rng, -circumradius, circumradius)};
    if (in_hex_cell(layout, site, p) && accept(p)) return p;
  }
  throw SamplingFailure(std::string(what) + ": rejection budget exceeded");
}

}  // namespace detail

// Uniform over (hex cell of the sector's site) ∩ (sector wedge), at least
// min_site_distance from every site.
inline Point2D sample_point_in_sector(const NetworkLayout& layout, std::size_t sector, Rng& rng,
                                      double min_site_distance = 10.0) {
  if (sector >= layout.n_sectors())
    throw InvalidArgument("sample_point_in_sector: sector index out of range");
  const std::size_t site = layout.sectors[sector].site;
  return detail::sample_in_cell(
      layout, site, rng,
      [&](Point2D p) {
        if (!in_sector_wedge(layout, sector, p)) return false;
        for (const auto& s : layout.sites)
          if (distance(s, p) < min_site_distance) return false;
        return true;
      },
      "sample_point_in_sector");
}

// Uniform over the whole hex cell of a site.
inline Point2D sample_point_in_site(const NetworkLayout& layout, std::size_t site, Rng& rng,
                                    double min_site_distance = 10.0) {
  if (site >= layout.n_sites()) throw InvalidArgument("sample_point_in_site: bad site index");
  return detail::sample_in_cell(
      layout, site, rng,
      [&](Point2D p) {
        for (const auto& s : layout.sites)
          if (distance(s, p) < min_site_distance) return false;
        return true;
      },
      "sample_point_in_site");
}

inline Point2D sample_point_in_disk(Point2D center, double radius, Rng& rng) {
  if (!(radius > 0.0)) throw InvalidArgument("sample_point_in_disk: radius must be positive");
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double theta = uniform(rng, 0.0, 360.0);
  return polar(center, r, theta);
}

struct Hotspot {
  Point2D center;
  double radius = 10.0;
};

struct UePopulation {
  std::vector<Point2D> positions;
  std::vector<bool> hotspot_flags;

  std::size_t size() const { return positions.size(); }
  std::size_t n_hotspot() const {
    std::size_t n = 0;
    for (bool f : hotspot_flags) n += f ? 1 : 0;
    return n;
  }
};

enum class UeRegion { kSector, kSite };

// One third of n_ues inside the hotspot disk, the rest uniform over the region.
inline UePopulation sample_ues(const NetworkLayout& layout, std::size_t sector, UeRegion region,
                               const Hotspot& hotspot, std::size_t n_ues, Rng& rng,
                               double min_site_distance = 10.0) {
  UePopulation pop;
  const std::size_t n_hot = n_ues / 3;
  pop.positions.reserve(n_ues);
  pop.hotspot_flags.reserve(n_ues);
  for (std::size_t i = 0; i < n_ues - n_hot; ++i) {
    pop.positions.push_back(region == UeRegion::kSector
                                ? sample_point_in_sector(layout, sector, rng, min_site_distance)
                                : sample_point_in_site(layout, layout.sectors.at(sector).site,
                                                       rng, min_site_distance));
    pop.hotspot_flags.push_back(false);
  }
  for (std::size_t i = 0; i < n_hot; ++i) {
    pop.positions.push_back(sample_point_in_disk(hotspot.center, hotspot.radius, rng));
    pop.hotspot_flags.push_back(true);
  }
  return pop;
}

}  // namespace mea
