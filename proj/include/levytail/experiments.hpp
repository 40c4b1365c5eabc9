#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "levytail/path_sim.hpp"
#include "levytail/series.hpp"
#include "levytail/tail_class.hpp"

namespace levytail {

enum class Outcome { consistent, inconsistent, low_confidence, hypotheses_failed };
const char* to_string(Outcome o);
int exit_code(Outcome o);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
    std::vector<std::size_t> rows;  // indices into ExperimentReport::rows
};

struct ReportRow {
    std::string table;  // CSV "experiment" column
    RatioRow row;
};

struct ExperimentReport {
    std::string id;
    nlohmann::json model;
    std::vector<ReportRow> rows;
    std::vector<Verdict> verdicts;
    bool hypotheses_verified = true;
    std::vector<std::string> notes;
    nlohmann::json provenance = nlohmann::json::object();
    nlohmann::json details = nlohmann::json::object();
    double wall_time = 0.0;

    std::size_t add_row(std::string table, RatioRow row);
    Verdict& add_verdict(std::string name, bool pass, std::string detail, std::vector<std::size_t> rows);
    const Verdict* find_verdict(const std::string& name) const;
    /// Low confidence on any row a verdict relies on wins over pass/fail.
    Outcome outcome() const;
};

nlohmann::json describe(const LevyModel& model);

// Finite-sample renderings of the limit statements. Rows whose denominator is
// 1 (u below the support) are trivial and excluded from trend checks.
struct TrendCheck {
    bool above_one = true;       // ratio >= 1 - CI everywhere
    bool non_increasing = true;  // ratio[i+1] <= ratio[i] + CI[i] + CI[i+1]
    bool final_near_one = true;  // last ratio <= 1 + 3 CI
    double final_ratio = 0.0;
    double final_ci = 0.0;
};
TrendCheck trend_check(const std::vector<RatioRow>& rows);

struct Thm1Options {
    std::vector<double> u_grid = {2, 3, 4, 5, 6};
    SimOptions sim;
    double tol = 1e-8;
};
ExperimentReport run_thm1(const LevyModel& model, const Thm1Options& opt);

struct Thm2Options {
    std::vector<double> u_grid = {2, 3, 4, 5, 6};
    SimOptions sim;
    double tol = 1e-8;
    std::vector<double> cond_h_grid;  // default 1, 2, ..., 200
};
ExperimentReport run_thm2(const LevyModel& model, const Thm2Options& opt);

struct Thm3Options {
    std::vector<int> n_range = {4, 5, 6, 7};
    double epsilon = 0.01;
    SimOptions sim;
    double tol = 1e-10;
    int lattice_n_max = 120;
};
ExperimentReport run_thm3(const LevyModel& model, const Thm3Options& opt);

struct Thm4Options {
    std::vector<int> n_range = {2, 3, 4, 5, 6, 7, 8};
    double v = 1.0;
    SimOptions sim;
    double tol = 1e-10;
    // MC validation levels
    int mc_factorial_n = 5;     // u = n!
    int mc_multiple_n = 4;      // u = n * n!
    std::vector<int> penultimate_n = {4, 5};
    // the scaled O-terms must stay below this over n = 3..n_max
    double o_term_bound = 10.0;
};
ExperimentReport run_thm4(const Thm4Options& opt);

struct Pl2Options {
    std::vector<double> u_grid = {2, 4, 6, 8};
    SimOptions sim;
    double tol = 1e-8;
    std::vector<double> alpha_grid = {0.25, 0.5, 1, 2, 4};
};
ExperimentReport run_prop_pl2(const LevyModel& model, const Pl2Options& opt);

struct MainOptions {
    std::vector<double> u_grid = {0.5, 1.5, 2.5, 3.5};
    SimOptions sim;
    double tol = 1e-10;
};
ExperimentReport run_prop_main(const LevyModel& model, const MainOptions& opt);

struct PlOptions {
    std::vector<double> u_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    double a = 1.0;
    double tol = 1e-8;
    double threshold = 0.05;
};
ExperimentReport run_prop_pl(const LevyModel& model, const PlOptions& opt);

}  // namespace levytail
