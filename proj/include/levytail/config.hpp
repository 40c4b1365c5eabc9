#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "levytail/jump_law.hpp"
#include "levytail/path_sim.hpp"
#include "levytail/series.hpp"

namespace levytail {

/// Every problem found in a document, in line order.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Parses "name key=value ...", e.g. "factorial v=2" or
/// "discretize base=exponential rate=2 step=0.25". Throws std::invalid_argument.
JumpLaw parse_law(std::string_view descriptor);

inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {"thm1", "thm2", "thm3", "thm4", "pl", "pl2", "main"};
    return ids;
}

struct RunConfig {
    std::string experiment;
    // [model]; absent for thm4, whose model is fixed
    std::optional<LevyModel> model;
    std::string law_descriptor;

    // [experiment]
    std::optional<std::vector<double>> u_grid;
    std::optional<std::vector<int>> n_range;
    std::optional<std::vector<double>> alpha_grid;
    std::optional<double> tol;
    std::optional<double> epsilon;  // thm3
    std::optional<double> v;        // thm4
    std::optional<double> a;        // pl
    std::optional<double> threshold;
    SimOptions sim;
    std::string outdir = "out";

    // normalized key -> raw value, for the manifest echo
    std::map<std::string, std::string> echo;
};

/// Flat "key = value" text with [model] and [experiment] sections; '#' and
/// ';' start comments. Throws ConfigError listing all problems found.
/// default_id stands in for a missing experiment.id and must match a present one.
RunConfig parse_config(std::string_view text, std::string_view default_id = {});
RunConfig load_config(const std::string& path, std::string_view default_id = {});

}  // namespace levytail
