#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mea/errors.hpp"
#include "mea/geometry.hpp"
#include "mea/network.hpp"
#include "mea/propagation.hpp"
#include "mea/selection.hpp"

namespace mea {

struct ExperimentConfig {
  // Monte Carlo
  std::size_t n_drops = 1000;
  std::uint64_t master_seed = 42;
  std::vector<double> gamma_bins_db{-5.0, -2.0, 0.0, 2.0, 5.0};
  double gamma_tol_db = 0.5;
  std::size_t max_drop_attempts = 100'000;

  // experiments
  std::vector<std::string> antenna_configs{"oda", "mea_single", "mea_double", "fixed_single",
                                           "fixed_double"};
  std::vector<double> misalignments_deg{0, 20, 40, 60, 90, 135, 180};
  std::vector<std::size_t> rounds_grid{1, 2, 5, 10, 15, 20};
  double alpha = 0.05;
  std::size_t max_rounds = 100;
  TTestComparison ttest_compare = TTestComparison::kRunnerUp;
  std::size_t sufficiency_resamples = 50;
  std::size_t reference_rounds = 100;
  double rate_bin_db = 0.0;
  std::optional<double> install_offset_deg;  // empty: uniform in [0, 90) per drop

  // layout and population
  double isd_m = 1000.0;
  double sector_offset_deg = 0.0;
  std::size_t selected_sector = 0;
  UeRegion ue_region = UeRegion::kSector;
  std::size_t n_ues = 30;
  double hotspot_radius_m = 10.0;
  double min_site_distance_m = 10.0;

  // radio
  double macro_tx_power_dbm = 46.0;
  double scbs_tx_power_dbm = 20.0;
  double bandwidth_hz = 10e6;
  double noise_figure_db = 9.0;
  double macro_gain_dbi = 14.0;
  double macro_hpbw_deg = 70.0;
  double macro_f2b_db = 25.0;
  double omni_gain_dbi = 0.0;
  double single_patch_gain_dbi = 7.0;
  double single_patch_hpbw_deg = 90.0;
  double single_patch_f2b_db = 15.0;
  double double_patch_gain_dbi = 10.0;
  double double_patch_hpbw_deg = 60.0;
  double double_patch_f2b_db = 20.0;
  double macro_pl_intercept_db = 128.1;
  double macro_pl_slope_db = 37.6;
  double scbs_pl_intercept_db = 140.7;
  double scbs_pl_slope_db = 36.7;
  double shadowing_sigma_db = 0.0;
  double shannon_bw_eff = 0.56;
  double shannon_sinr_eff = 2.0;
  double shannon_se_cap = 4.4;

  RadioParams radio() const {
    RadioParams r;
    r.macro_tx_power_dbm = macro_tx_power_dbm;
    r.scbs_tx_power_dbm = scbs_tx_power_dbm;
    r.bandwidth_hz = bandwidth_hz;
    r.noise_figure_db = noise_figure_db;
    r.macro_pattern = AntennaPattern::macro_sector(macro_gain_dbi, macro_hpbw_deg, macro_f2b_db);
    r.macro_pathloss = PathlossModel::macro_uma(macro_pl_intercept_db, macro_pl_slope_db);
    r.scbs_pathloss = PathlossModel::smallcell_outdoor(scbs_pl_intercept_db, scbs_pl_slope_db);
    r.omni_gain_dbi = omni_gain_dbi;
    r.shannon = {shannon_bw_eff, shannon_sinr_eff, shannon_se_cap};
    return r;
  }
  AntennaPattern single_patch() const {
    return AntennaPattern::patch(single_patch_gain_dbi, single_patch_hpbw_deg, single_patch_f2b_db);
  }
  AntennaPattern double_patch() const {
    return AntennaPattern::patch(double_patch_gain_dbi, double_patch_hpbw_deg, double_patch_f2b_db);
  }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': '" + v + "' is not a finite number", key);
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer", key);
  return out;
}

// Shortest text that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v + 0.0);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

inline void check_range(const std::string& key, double v, double lo, double hi, bool lo_open) {
  const bool ok = (lo_open ? v > lo : v >= lo) && v <= hi;
  if (!ok) {
    std::ostringstream os;
    os << "config key '" << key << "': value " << v << " outside " << (lo_open ? '(' : '[') << lo
       << ", " << hi << ']';
    throw ConfigError(os.str(), key);
  }
}

}  // namespace config_detail

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

namespace config_detail {

inline ConfigKey real(std::string name, double ExperimentConfig::*m, double lo, double hi,
                      bool lo_open, std::string help) {
  return {name, std::move(help),
          [name, m, lo, hi, lo_open](ExperimentConfig& c, const std::string& v) {
            const double x = parse_double(name, v);
            check_range(name, x, lo, hi, lo_open);
            c.*m = x;
          },
          [m](const ExperimentConfig& c) { return fmt_double(c.*m); }};
}

inline ConfigKey count(std::string name, std::size_t ExperimentConfig::*m, std::size_t lo,
                       std::size_t hi, std::string help) {
  return {name, std::move(help),
          [name, m, lo, hi](ExperimentConfig& c, const std::string& v) {
            const auto x = parse_u64(name, v);
            check_range(name, static_cast<double>(x), static_cast<double>(lo),
                        static_cast<double>(hi), false);
            c.*m = static_cast<std::size_t>(x);
          },
          [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

}  // namespace config_detail

inline const std::vector<ConfigKey>& config_keys() {
  using namespace config_detail;
  using C = ExperimentConfig;
  constexpr double big = 1e12;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(count("n_drops", &C::n_drops, 1, 100'000'000, "drops per gamma bin"));
    k.push_back({"master_seed", "master random seed",
                 [](C& c, const std::string& v) { c.master_seed = parse_u64("master_seed", v); },
                 [](const C& c) { return std::to_string(c.master_seed); }});
    k.push_back({"gamma_bins_db", "comma-separated gamma_HS bin centres (dB)",
                 [](C& c, const std::string& v) {
                   std::vector<double> xs;
                   for (auto& s : split_list(v)) xs.push_back(parse_double("gamma_bins_db", s));
                   if (xs.empty()) throw ConfigError("gamma_bins_db: empty list", "gamma_bins_db");
                   c.gamma_bins_db = xs;
                 },
                 [](const C& c) {
                   return join<double>(c.gamma_bins_db, [](const double& x) { return fmt_double(x); });
                 }});
    k.push_back(real("gamma_tol_db", &C::gamma_tol_db, 0, 100, true, "bin half-width (dB)"));
    k.push_back(count("max_drop_attempts", &C::max_drop_attempts, 1, 1'000'000'000,
                      "placement rejections before a bin is declared infeasible"));
    k.push_back({"antenna_configs",
                 "served-ues configs: oda, mea_single, mea_double, fixed_single, fixed_double",
                 [](C& c, const std::string& v) {
                   static const std::vector<std::string> allowed{
                       "oda", "mea_single", "mea_double", "fixed_single", "fixed_double"};
                   auto xs = split_list(v);
                   for (auto& x : xs)
                     if (std::find(allowed.begin(), allowed.end(), x) == allowed.end())
                       throw ConfigError("antenna_configs: unknown config '" + x + "'",
                                         "antenna_configs");
                   if (xs.empty()) throw ConfigError("antenna_configs: empty list", "antenna_configs");
                   c.antenna_configs = xs;
                 },
                 [](const C& c) {
                   return join<std::string>(c.antenna_configs, [](const std::string& s) { return s; });
                 }});
    k.push_back({"misalignments_deg", "fixed-directional misalignments (deg, each in [0, 180])",
                 [](C& c, const std::string& v) {
                   std::vector<double> xs;
                   for (auto& s : split_list(v)) {
                     const double x = parse_double("misalignments_deg", s);
                     check_range("misalignments_deg", x, 0.0, 180.0, false);
                     xs.push_back(x);
                   }
                   c.misalignments_deg = xs;
                 },
                 [](const C& c) {
                   return join<double>(c.misalignments_deg,
                                       [](const double& x) { return fmt_double(x); });
                 }});
    k.push_back({"rounds_grid", "training lengths k for the accuracy experiment",
                 [](C& c, const std::string& v) {
                   std::vector<std::size_t> xs;
                   for (auto& s : split_list(v)) {
                     const auto x = parse_u64("rounds_grid", s);
                     if (x < 1) throw ConfigError("rounds_grid: k must be >= 1", "rounds_grid");
                     xs.push_back(static_cast<std::size_t>(x));
                   }
                   if (xs.empty()) throw ConfigError("rounds_grid: empty list", "rounds_grid");
                   c.rounds_grid = xs;
                 },
                 [](const C& c) {
                   return join<std::size_t>(c.rounds_grid,
                                            [](const std::size_t& x) { return std::to_string(x); });
                 }});
    k.push_back(real("alpha", &C::alpha, 0, 1, true, "one-sided significance level"));
    k.push_back(count("max_rounds", &C::max_rounds, 2, 100'000, "T-test round budget"));
    k.push_back({"ttest_compare", "runner_up | pooled",
                 [](C& c, const std::string& v) {
                   const auto t = trim(v);
                   if (t == "runner_up") c.ttest_compare = TTestComparison::kRunnerUp;
                   else if (t == "pooled") c.ttest_compare = TTestComparison::kPooled;
                   else throw ConfigError("ttest_compare: expected runner_up or pooled", "ttest_compare");
                 },
                 [](const C& c) {
                   return std::string(c.ttest_compare == TTestComparison::kPooled ? "pooled"
                                                                                  : "runner_up");
                 }});
    k.push_back(count("sufficiency_resamples", &C::sufficiency_resamples, 1, 100'000,
                      "UE resamples per placement in the single-round check"));
    k.push_back(count("reference_rounds", &C::reference_rounds, 1, 100'000,
                      "rounds defining the empirically dominant element"));
    k.push_back(real("rate_bin_db", &C::rate_bin_db, -big, big, false,
                     "gamma bin used for the rate CDFs (must be one of gamma_bins_db)"));
    k.push_back({"install_offset_deg", "MEA install offset: 'random' or degrees",
                 [](C& c, const std::string& v) {
                   const auto t = trim(v);
                   if (t == "random") c.install_offset_deg.reset();
                   else c.install_offset_deg = wrap_deg(parse_double("install_offset_deg", t));
                 },
                 [](const C& c) {
                   return c.install_offset_deg ? fmt_double(*c.install_offset_deg)
                                               : std::string("random");
                 }});
    k.push_back(real("isd_m", &C::isd_m, 0, big, true, "inter-site distance (m)"));
    k.push_back(real("sector_offset_deg", &C::sector_offset_deg, -360, 360, false,
                     "rotation added to the 30/150/270 sector boresights"));
    k.push_back(count("selected_sector", &C::selected_sector, 0, 2, "sector of the centre site"));
    k.push_back({"ue_region", "sector | site",
                 [](C& c, const std::string& v) {
                   const auto t = trim(v);
                   if (t == "sector") c.ue_region = UeRegion::kSector;
                   else if (t == "site") c.ue_region = UeRegion::kSite;
                   else throw ConfigError("ue_region: expected sector or site", "ue_region");
                 },
                 [](const C& c) {
                   return std::string(c.ue_region == UeRegion::kSite ? "site" : "sector");
                 }});
    k.push_back(count("n_ues", &C::n_ues, 3, 100'000, "UEs per drop (one third in the hotspot)"));
    k.push_back(real("hotspot_radius_m", &C::hotspot_radius_m, 0, big, true, "hotspot radius (m)"));
    k.push_back(real("min_site_distance_m", &C::min_site_distance_m, 0, big, false,
                     "exclusion radius around macro sites (m)"));
    k.push_back(real("macro_tx_power_dbm", &C::macro_tx_power_dbm, -big, big, false, ""));
    k.push_back(real("scbs_tx_power_dbm", &C::scbs_tx_power_dbm, -big, big, false, ""));
    k.push_back(real("bandwidth_hz", &C::bandwidth_hz, 0, big, true, ""));
    k.push_back(real("noise_figure_db", &C::noise_figure_db, 0, 100, false, ""));
    k.push_back(real("macro_gain_dbi", &C::macro_gain_dbi, -100, 100, false, ""));
    k.push_back(real("macro_hpbw_deg", &C::macro_hpbw_deg, 0, 359.999, true, ""));
    k.push_back(real("macro_f2b_db", &C::macro_f2b_db, 0, 200, false, ""));
    k.push_back(real("omni_gain_dbi", &C::omni_gain_dbi, -100, 100, false, ""));
    k.push_back(real("single_patch_gain_dbi", &C::single_patch_gain_dbi, -100, 100, false, ""));
    k.push_back(real("single_patch_hpbw_deg", &C::single_patch_hpbw_deg, 0, 359.999, true, ""));
    k.push_back(real("single_patch_f2b_db", &C::single_patch_f2b_db, 0, 200, false, ""));
    k.push_back(real("double_patch_gain_dbi", &C::double_patch_gain_dbi, -100, 100, false, ""));
    k.push_back(real("double_patch_hpbw_deg", &C::double_patch_hpbw_deg, 0, 359.999, true, ""));
    k.push_back(real("double_patch_f2b_db", &C::double_patch_f2b_db, 0, 200, false, ""));
    k.push_back(real("macro_pl_intercept_db", &C::macro_pl_intercept_db, -big, big, false, ""));
    k.push_back(real("macro_pl_slope_db", &C::macro_pl_slope_db, 0, big, true, ""));
    k.push_back(real("scbs_pl_intercept_db", &C::scbs_pl_intercept_db, -big, big, false, ""));
    k.push_back(real("scbs_pl_slope_db", &C::scbs_pl_slope_db, 0, big, true, ""));
    k.push_back(real("shadowing_sigma_db", &C::shadowing_sigma_db, 0, 100, false,
                     "lognormal shadowing std-dev; 0 disables"));
    k.push_back(real("shannon_bw_eff", &C::shannon_bw_eff, 0, 1, true, ""));
    k.push_back(real("shannon_sinr_eff", &C::shannon_sinr_eff, 0, big, true, "linear"));
    k.push_back(real("shannon_se_cap", &C::shannon_se_cap, 0, big, true, "bit/s/Hz"));
    return k;
  }();
  return keys;
}

inline const ConfigKey& find_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return k;
  throw ConfigError("unknown config key '" + name + "'", name);
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  find_key(key).set(c, value);
}

// "key=value"
inline void apply_override(ExperimentConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + kv + "' is not of the form key=value");
  apply_setting(c, config_detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
}

// Flat key = value lines; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& c, const std::string& text,
                              const std::string& origin = "<text>") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, config_detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void validate(const ExperimentConfig& c) {
  if (std::find(c.gamma_bins_db.begin(), c.gamma_bins_db.end(), c.rate_bin_db) ==
      c.gamma_bins_db.end())
    throw ConfigError("rate_bin_db must be one of gamma_bins_db", "rate_bin_db");
  if (c.n_ues / 3 == 0) throw ConfigError("n_ues must be at least 3", "n_ues");
  if (c.misalignments_deg.empty() &&
      (std::count(c.antenna_configs.begin(), c.antenna_configs.end(), "fixed_single") ||
       std::count(c.antenna_configs.begin(), c.antenna_configs.end(), "fixed_double")))
    throw ConfigError("fixed antenna configs need at least one misalignment", "misalignments_deg");
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

inline std::string env_name(const std::string& key) {
  std::string out = "MEA_SIM_";
  for (char ch : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

// defaults <- file <- MEA_SIM_* environment <- key=value overrides
inline ExperimentConfig parse_config(const std::optional<std::string>& path,
                                     const std::vector<std::string>& overrides,
                                     const EnvLookup& env = process_env) {
  ExperimentConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(c, ss.str(), *path);
  }
  if (env)
    for (const auto& k : config_keys())
      if (auto v = env(env_name(k.name))) apply_setting(c, k.name, *v);
  for (const auto& o : overrides) apply_override(c, o);
  validate(c);
  return c;
}

// Canonical "key = value" listing in table order.
inline std::string format_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(c) + "\n";
  return out;
}

inline std::map<std::string, std::string> config_map(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  for (const auto& k : config_keys()) m[k.name] = k.get(c);
  return m;
}

// FNV-1a over the canonical listing.
inline std::string config_fingerprint(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : format_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mea
