#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "levytail/experiments.hpp"
#include "levytail/normal.hpp"

using namespace levytail;

namespace {

RatioRow row(double u, double ratio, double ci, double denominator = 0.1, bool low = false) {
    RatioRow r;
    r.u = u;
    r.ratio = ratio;
    r.ratio_lo = ratio - ci;
    r.ratio_hi = ratio + ci;
    r.denominator = denominator;
    r.numerator = ratio * denominator;
    r.low_confidence = low;
    r.numerator_hits = low ? 10 : 10000;
    return r;
}

SimOptions sim(std::uint64_t trials, std::uint64_t seed = 3) {
    SimOptions s;
    s.trials = trials;
    s.seed = seed;
    return s;
}

std::size_t count_rows(const ExperimentReport& rep, const std::string& table) {
    std::size_t n = 0;
    for (const auto& r : rep.rows) n += r.table == table;
    return n;
}

bool passed(const ExperimentReport& rep, const std::string& name) {
    const Verdict* v = rep.find_verdict(name);
    REQUIRE(v != nullptr);
    return v->pass;
}

}  // namespace

TEST_CASE("outcomes and exit codes") {
    CHECK(std::string(to_string(Outcome::consistent)) == "consistent");
    CHECK(std::string(to_string(Outcome::inconsistent)) == "inconsistent");
    CHECK(std::string(to_string(Outcome::low_confidence)) == "low-confidence");
    CHECK(std::string(to_string(Outcome::hypotheses_failed)) == "hypotheses-failed");
    CHECK(exit_code(Outcome::consistent) == 0);
    CHECK(exit_code(Outcome::inconsistent) == 2);
    CHECK(exit_code(Outcome::low_confidence) == 3);
    CHECK(exit_code(Outcome::hypotheses_failed) == 2);

    ExperimentReport rep;
    CHECK(rep.outcome() == Outcome::hypotheses_failed);
    auto a = rep.add_row("t", row(1, 1.2, 0.1));
    auto b = rep.add_row("t", row(2, 1.1, 0.1, 0.1, true));
    rep.add_verdict("first", true, "", {a});
    CHECK(rep.outcome() == Outcome::consistent);
    rep.add_verdict("second", false, "", {a});
    CHECK(rep.outcome() == Outcome::inconsistent);
    // a thin row behind any verdict outranks pass or fail
    rep.add_verdict("third", true, "", {b});
    CHECK(rep.outcome() == Outcome::low_confidence);
    CHECK(rep.find_verdict("second") != nullptr);
    CHECK(rep.find_verdict("missing") == nullptr);

    ExperimentReport refused;
    refused.add_verdict("hypotheses", false, "", {});
    CHECK(refused.outcome() == Outcome::hypotheses_failed);
}

TEST_CASE("trend check") {
    TrendCheck good = trend_check({row(2, 1.5, 0.02), row(3, 1.2, 0.02), row(4, 1.04, 0.02)});
    CHECK(good.above_one);
    CHECK(good.non_increasing);
    CHECK(good.final_near_one);
    CHECK(good.final_ratio == 1.04);

    TrendCheck rising = trend_check({row(2, 1.1, 0.01), row(3, 1.2, 0.01)});
    CHECK(!rising.non_increasing);
    CHECK(!rising.final_near_one);

    CHECK(!trend_check({row(2, 0.9, 0.01)}).above_one);

    // a trivial first row (denominator 1) is ignored for the monotone check
    TrendCheck trivial = trend_check({row(-1, 1.0, 0.0, 1.0), row(3, 1.2, 0.1)});
    CHECK(trivial.non_increasing);
    CHECK(trivial.final_ratio == 1.2);
}

TEST_CASE("thm1 harness") {
    LevyModel m{1.0, 0.0, 1.0, half_normal_law()};
    Thm1Options opt;
    opt.u_grid = {-1.0, 1.0, 2.0, 3.0};
    opt.sim = sim(200000);
    ExperimentReport rep = run_thm1(m, opt);
    CHECK(rep.id == "thm1");
    CHECK(rep.hypotheses_verified);
    CHECK(count_rows(rep, "thm1") == 4);
    for (const auto& r : rep.rows) {
        CHECK(r.row.method == "mc/bracket");
        CHECK(r.row.ratio >= 1.0 - r.row.ci());
        CHECK(r.row.ratio_lo <= r.row.ratio);
    }
    CHECK(rep.find_verdict("non_increasing"));
    CHECK(rep.find_verdict("final_near_one"));
    CHECK(rep.provenance.contains("certificates"));
    CHECK(rep.model["law_kind"] == "continuous_hazard");

    CHECK_THROWS_AS(run_thm1(LevyModel{0.0, 1.0, 1.0, half_normal_law()}, opt), std::invalid_argument);

    // the heavy-tailed factorial law fails the classifier and is reported as such
    LevyModel heavy{1.0, 0.0, 1.0, factorial_law(1.0)};
    opt.u_grid = {2.0};
    opt.sim = sim(20000);
    ExperimentReport h = run_thm1(heavy, opt);
    CHECK(!h.hypotheses_verified);
    CHECK(!h.notes.empty());
}

TEST_CASE("thm2 harness") {
    LevyModel m{0.0, 1.0, 1.0, half_normal_law()};
    Thm2Options opt;
    opt.u_grid = {1.0, 2.0, 3.0, 4.0};
    opt.sim = sim(200000);
    ExperimentReport rep = run_thm2(m, opt);
    CHECK(rep.hypotheses_verified);
    CHECK(count_rows(rep, "thm2") == 4);
    CHECK(count_rows(rep, "thm2.q") == 4);
    CHECK(passed(rep, "q_ratio_positive"));
    CHECK(passed(rep, "q_ratio_decreasing"));
    for (const auto& r : rep.rows)
        if (r.table == "thm2.q") CHECK((r.row.ratio > 0.0 && r.row.ratio < 1.0));

    CHECK_THROWS_AS(run_thm2(LevyModel{1.0, 1.0, 1.0, half_normal_law()}, opt), std::invalid_argument);
    CHECK_THROWS_AS(run_thm2(LevyModel{0.0, 0.0, 1.0, half_normal_law()}, opt), std::invalid_argument);
}

TEST_CASE("thm3 harness") {
    LevyModel m{0.0, 0.5, 1.0, lattice_factorial_law()};
    Thm3Options opt;
    opt.n_range = {3, 4, 5};
    opt.sim = sim(300000);
    ExperimentReport rep = run_thm3(m, opt);
    CHECK(rep.hypotheses_verified);
    CHECK(count_rows(rep, "thm3.plus") == 3);
    CHECK(count_rows(rep, "thm3.minus") == 3);
    for (const auto& r : rep.rows) {
        if (r.table == "thm3.plus") CHECK(r.row.u == doctest::Approx(std::round(r.row.u + 0.5 - 0.01) - 0.5 + 0.01));
        CHECK(r.row.method == "mc/exact");
    }
    CHECK(passed(rep, "plus_ratio_increasing"));

    CHECK_THROWS_AS(run_thm3(LevyModel{0.0, 0.5, 1.0, factorial_law(1.0)}, opt), std::invalid_argument);
}

TEST_CASE("thm4 harness") {
    Thm4Options opt;
    opt.n_range = {2, 3, 4, 5};
    opt.sim = sim(100000);
    ExperimentReport rep = run_thm4(opt);
    CHECK(count_rows(rep, "thm4.factorial") == 4);
    CHECK(count_rows(rep, "thm4.bound") == 4);
    CHECK(count_rows(rep, "thm4.multiple") == 4);
    CHECK(count_rows(rep, "thm4.mc") == 2);
    CHECK(passed(rep, "o_term_factorial_bounded"));
    CHECK(passed(rep, "o_term_multiple_bounded"));
    CHECK(passed(rep, "delta_positive"));
    REQUIRE(rep.details.contains("I_k"));
    // I_1 = 1/(2e) closes the sum below I_2
    const double e = std::exp(1.0);
    for (const auto& r : rep.rows) {
        if (r.table != "thm4.bound") continue;
        CHECK(r.row.method == "exact/lower-bound");
        if (r.row.u >= 6.0) CHECK(r.row.ratio > 1.0);
        CHECK(r.row.ratio < 1.0 + 1.0 / e);
    }

    Thm4Options bad;
    bad.n_range = {1, 2};
    CHECK_THROWS_AS(run_thm4(bad), std::invalid_argument);
    bad.n_range = {2, 21};
    CHECK_THROWS_AS(run_thm4(bad), std::invalid_argument);
}

TEST_CASE("pl2 harness") {
    LevyModel m{1.0, 0.0, 1.0, half_normal_law()};
    Pl2Options opt;
    opt.u_grid = {2.0, 4.0};
    opt.sim = sim(200000);
    ExperimentReport rep = run_prop_pl2(m, opt);
    CHECK(rep.hypotheses_verified);
    CHECK(count_rows(rep, "pl2") == 2);
    CHECK(count_rows(rep, "pl2.l") == 5);
    CHECK(passed(rep, "l_in_open_interval"));
    CHECK(passed(rep, "l_at_one"));
    CHECK(passed(rep, "ratio_increasing"));
    for (const auto& r : rep.rows)
        if (r.table == "pl2.l" && r.row.u == 1.0) CHECK(r.row.ratio == doctest::Approx(1.6826894921370859));
}

TEST_CASE("main harness") {
    LevyModel m{0.0, 0.0, 1.0, rademacher_law()};
    MainOptions opt;
    opt.sim = sim(300000);
    ExperimentReport rep = run_prop_main(m, opt);
    CHECK(count_rows(rep, "main") == 4);
    CHECK(count_rows(rep, "main.d") == 4);
    CHECK(passed(rep, "lemma_one_bound"));
    CHECK(passed(rep, "ratio_bound"));
    CHECK(passed(rep, "d_positive"));
    CHECK(rep.outcome() == Outcome::consistent);

    LevyModel skew{0.0, 0.0, 1.0, discrete_law(std::vector<double>{-1.0, 2.0}, {0.5, 0.5})};
    CHECK_THROWS_AS(run_prop_main(skew, opt), std::invalid_argument);
    CHECK_THROWS_AS(run_prop_main(LevyModel{0.0, 0.0, 1.0, half_normal_law()}, opt), std::invalid_argument);
}

TEST_CASE("pl harness") {
    // exponential jumps have a constant ratio P(X > u + 1) / P(X > u): refused
    LevyModel expo{0.0, 0.0, 1.0, exponential_law(1.0)};
    ExperimentReport refused = run_prop_pl(expo, {});
    CHECK(refused.rows.empty());
    CHECK(!refused.hypotheses_verified);
    CHECK(refused.outcome() == Outcome::hypotheses_failed);
    CHECK(exit_code(refused.outcome()) == 2);

    LevyModel lin{0.0, 0.0, 1.0, linear_hazard_law()};
    PlOptions opt;
    opt.u_grid = {1.0, 2.0, 3.0, 4.0};
    ExperimentReport rep = run_prop_pl(lin, opt);
    CHECK(rep.hypotheses_verified);
    CHECK(count_rows(rep, "pl") == 4);
    CHECK(passed(rep, "ratio_in_unit_interval"));
    double prev = 2.0;
    for (const auto& r : rep.rows) {
        CHECK(r.row.ratio < prev);
        prev = r.row.ratio;
    }
}
