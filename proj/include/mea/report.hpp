#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mea/errors.hpp"

namespace mea {

struct MeanCi {
  double mean = 0.0;
  double std = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::size_t n = 0;

  double half_width() const { return 0.5 * (ci95_high - ci95_low); }
};

// Normal-approximation 95% interval; n = 1 gives a degenerate interval.
template <typename T>
MeanCi mean_ci(std::span<const T> samples) {
  if (samples.empty()) throw InvalidArgument("mean_ci: empty input");
  MeanCi r;
  r.n = samples.size();
  for (const auto& x : samples) r.mean += static_cast<double>(x);
  r.mean /= static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (const auto& x : samples) {
      const double d = static_cast<double>(x) - r.mean;
      ss += d * d;
    }
    r.std = std::sqrt(ss / static_cast<double>(r.n - 1));
  }
  const double hw = 1.96 * r.std / std::sqrt(static_cast<double>(r.n));
  r.ci95_low = r.mean - hw;
  r.ci95_high = r.mean + hw;
  return r;
}

template <typename T>
MeanCi mean_ci(const std::vector<T>& samples) {
  return mean_ci(std::span<const T>(samples));
}

// Wilson score interval for a binomial proportion.
inline MeanCi proportion_ci(std::size_t successes, std::size_t n) {
  if (n == 0) throw InvalidArgument("proportion_ci: no trials");
  const double z = 1.96, nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2 * nn)) / denom;
  const double hw = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  MeanCi r;
  r.mean = p;
  r.std = std::sqrt(p * (1 - p));
  r.ci95_low = std::max(0.0, std::min(p, centre - hw));
  r.ci95_high = std::min(1.0, std::max(p, centre + hw));
  r.n = n;
  return r;
}

struct CdfSeries {
  std::vector<double> values;
  std::vector<double> probs;

  // Non-decreasing values, strictly increasing probabilities ending at 1.
  bool valid() const {
    if (values.empty() || values.size() != probs.size()) return false;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1] || probs[i] <= probs[i - 1]) return false;
    return probs.front() > 0.0 && probs.back() == 1.0;
  }
};

// Step CDF at the sorted unique sample values.
inline CdfSeries empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("empirical_cdf: empty input");
  std::sort(samples.begin(), samples.end());
  CdfSeries c;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    c.values.push_back(samples[i]);
    c.probs.push_back(i + 1 == samples.size() ? 1.0 : static_cast<double>(i + 1) / n);
  }
  return c;
}

// Six significant digits, no negative zero.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using Cell = std::variant<double, std::int64_t, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    // Mirror the CSV precision.
    return std::stod(format_number(*d));
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ExperimentRecord {
  std::string id;
  std::string fingerprint;
  std::size_t n_drops = 0;
  std::vector<Table> tables;
  std::vector<CdfSeries> cdfs;                                 // checked before writing
  std::vector<std::pair<std::string, std::string>> attachments;  // extra files (name, content)
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
};

enum class OutputFormat { kCsv, kJson };

inline std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline std::string table_json(const Table& t, const ExperimentRecord& r) {
  nlohmann::ordered_json doc;
  doc["experiment"] = r.id;
  doc["config_fingerprint"] = r.fingerprint;
  doc["n_drops"] = r.n_drops;
  doc["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < row.size(); ++i) o[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(o));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Writes every table of the record into `dir`; returns the file paths.
inline std::vector<std::filesystem::path> write_results(const ExperimentRecord& record,
                                                        const std::filesystem::path& dir,
                                                        OutputFormat format) {
  for (const auto& c : record.cdfs)
    if (!c.valid()) throw IoError("refusing to write an invalid CDF series for " + record.id);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& t : record.tables) {
    const auto path = dir / (t.name + (format == OutputFormat::kCsv ? ".csv" : ".json"));
    write_file(path, format == OutputFormat::kCsv ? table_csv(t) : table_json(t, record));
    written.push_back(path);
  }
  for (const auto& [name, content] : record.attachments) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  }
  return written;
}

// Minimal CSV reader for the files written above (no quoting).
inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Table t;
  t.name = path.stem().string();
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      auto pos = s.find(',', start);
      out.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  if (std::getline(in, line)) t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    for (auto& f : split(line)) row.emplace_back(f);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace mea
