#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mea/config.hpp"
#include "mea/errors.hpp"
#include "mea/experiment.hpp"
#include "mea/report.hpp"

namespace mea {

inline constexpr const char* kVersion = "mea-sim 0.1.0";

enum class Subcommand { kSelectionAccuracy, kTTestRounds, kServedUes, kRateCdf, kAll, kValidateConfig };

inline std::optional<Subcommand> parse_subcommand(const std::string& s) {
  if (s == "selection-accuracy") return Subcommand::kSelectionAccuracy;
  if (s == "ttest-rounds") return Subcommand::kTTestRounds;
  if (s == "served-ues") return Subcommand::kServedUes;
  if (s == "rate-cdf") return Subcommand::kRateCdf;
  if (s == "all") return Subcommand::kAll;
  if (s == "validate-config") return Subcommand::kValidateConfig;
  return std::nullopt;
}

// Exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitBinInfeasible = 3,
  kExitIo = 4,
  kExitSampling = 5,
};

struct CliInvocation {
  Subcommand subcommand = Subcommand::kAll;
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::filesystem::path out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  OutputFormat format = OutputFormat::kCsv;
  bool quiet = false;
  EnvLookup env = process_env;
};

namespace app_detail {

inline void move_into(const std::filesystem::path& staging, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  for (const auto& entry : std::filesystem::directory_iterator(staging)) {
    const auto target = out_dir / entry.path().filename();
    std::filesystem::rename(entry.path(), target, ec);
    if (ec) throw IoError("cannot move result into '" + target.string() + "': " + ec.message());
  }
  std::filesystem::remove(staging, ec);
}

inline std::filesystem::path staging_dir(const std::filesystem::path& out_dir,
                                         const std::string& fingerprint) {
  auto parent = out_dir.has_parent_path() ? out_dir.parent_path() : std::filesystem::path(".");
  return parent / ("." + out_dir.filename().string() + ".staging-" + fingerprint);
}

}  // namespace app_detail

// Resolves the configuration from the invocation (the --seed flag wins).
inline ExperimentConfig resolve_config(const CliInvocation& inv) {
  auto overrides = inv.overrides;
  if (inv.seed) overrides.push_back("master_seed=" + std::to_string(*inv.seed));
  return parse_config(inv.config_path, overrides, inv.env);
}

inline int run(const CliInvocation& inv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  try {
    const ExperimentConfig cfg = resolve_config(inv);
    if (inv.subcommand == Subcommand::kValidateConfig) {
      out << format_config(cfg);
      return kExitOk;
    }
    const Progress progress = [&](const std::string& msg) {
      if (!inv.quiet) err << msg << '\n';
    };
    const Simulation sim(cfg);
    const DropPool pool = make_drop_pool(sim, inv.workers, progress);

    const bool all = inv.subcommand == Subcommand::kAll;
    std::vector<ExperimentRecord> records;
    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["master_seed"] = cfg.master_seed;
    manifest["config_fingerprint"] = config_fingerprint(cfg);
    {
      nlohmann::ordered_json c;
      for (const auto& k : config_keys()) c[k.name] = k.get(cfg);
      manifest["config"] = std::move(c);
    }
    manifest["drop_acceptance"] = drop_pool_stats(sim, pool);
    auto experiments = nlohmann::ordered_json::object();

    if (all || inv.subcommand == Subcommand::kSelectionAccuracy)
      records.push_back(to_record(exp_selection_accuracy(sim, pool, inv.workers, progress), cfg));
    if (all || inv.subcommand == Subcommand::kTTestRounds)
      records.push_back(to_record(exp_ttest_rounds(sim, pool, inv.workers, progress), cfg));
    if (all || inv.subcommand == Subcommand::kServedUes)
      records.push_back(to_record(exp_served_ues(sim, pool, inv.workers, progress), cfg));
    if (all || inv.subcommand == Subcommand::kRateCdf)
      records.push_back(to_record(exp_rate_cdf(sim, pool, inv.workers, progress), cfg));

    const auto staging = app_detail::staging_dir(inv.out_dir, config_fingerprint(cfg));
    std::error_code ec;
    std::filesystem::remove_all(staging, ec);
    for (const auto& r : records) {
      write_results(r, staging, inv.format);
      experiments[r.id] = r.extras;
    }
    manifest["experiments"] = std::move(experiments);
    write_file(staging / "run_manifest.json", manifest.dump(2) + "\n");
    app_detail::move_into(staging, inv.out_dir);
    if (!inv.quiet) err << "results written to " << inv.out_dir.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BinInfeasible& e) {
    err << "error: " << e.what() << '\n';
    return kExitBinInfeasible;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SamplingFailure& e) {
    err << "sampling error: " << e.what() << '\n';
    return kExitSampling;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mea
