#pragma once

#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "levytail/config.hpp"
#include "levytail/experiments.hpp"

namespace levytail {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kCsvHeader =
    "experiment,u,numerator,numerator_err,denominator,denominator_err,ratio,ratio_lo,ratio_hi,method";

/// 17 significant digits, so equal doubles print identically and differing ones differently.
std::string format_number(double x);

std::string table_csv(const ExperimentReport& rep);
nlohmann::json report_json(const ExperimentReport& rep);

std::string sha256_hex(std::string_view data);

struct RunTimes {
    std::string started;   // ISO 8601 UTC
    std::string finished;
};
std::string utc_now();

nlohmann::json manifest_json(const RunConfig& cfg, const ExperimentReport& rep, const RunTimes& times,
                             const std::map<std::string, std::string>& digests);

/// Writes report.json, table.csv and manifest.json under outdir (created if
/// needed). Throws std::runtime_error naming the failing path.
void write_outputs(const std::string& outdir, const RunConfig& cfg, const ExperimentReport& rep,
                   const RunTimes& times);

/// Dispatches cfg.experiment with defaults for any unset field.
ExperimentReport run_experiment(const RunConfig& cfg);

}  // namespace levytail
