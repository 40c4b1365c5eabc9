#include <doctest.h>

#include <cmath>
#include <numeric>

#include "levytail/jump_law.hpp"
#include "levytail/log_space.hpp"
#include "levytail/tail_class.hpp"

using namespace levytail;

namespace {

double total_mass(const JumpLaw& law) {
    double s = 0.0;
    for (const auto& a : law.atoms()) s += std::exp(a.log_mass);
    return s;
}

double mass_at(const JumpLaw& law, double x) {
    for (const auto& a : law.atoms())
        if (std::fabs(law.value(a) - x) < 1e-12 * std::max(1.0, std::fabs(x))) return std::exp(a.log_mass);
    return 0.0;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("rational steps stay exact") {
    Rational r = Rational::parse("0.25");
    CHECK(r.num() == 1);
    CHECK(r.den() == 4);
    CHECK(Rational::parse("1/3") == Rational(1, 3));
    CHECK(r.first_index_above(0.5) == 3);
    CHECK(r.first_index_above(0.49) == 2);
    CHECK(r.last_index_at_or_below(0.5) == 2);
    CHECK(rational_gcd(Rational(1, 2), Rational(3, 4)) == Rational(1, 4));
    Index big = 1;
    for (int i = 2; i <= 27; ++i) big *= i;
    CHECK(to_string(big) == "10888869450418352160768000000");
}

TEST_CASE("hazard law tails") {
    JumpLaw lin = hazard_law([](double v) { return v; }, 0.0, "h=v");
    CHECK(lin.tail(0.0) == doctest::Approx(1.0));
    CHECK(lin.tail(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
    CHECK(lin.log_tail(5.0) == doctest::Approx(-12.5).epsilon(1e-10));
    CHECK(lin.tail(-3.0) == 1.0);

    // constant, linear and power hazards against their antiderivatives
    JumpLaw c = hazard_law([](double) { return 1.5; });
    CHECK(std::fabs(c.log_tail(3.0) + 4.5) < 1e-8);
    JumpLaw p = hazard_law([](double v) { return std::pow(v, 2.5); });
    CHECK(std::fabs(p.log_tail(2.0) + std::pow(2.0, 3.5) / 3.5) < 1e-8);
    CHECK(std::fabs(linear_hazard_law().log_tail(7.0) + 24.5) < 1e-8);
    CHECK(std::fabs(power_hazard_law(2.0).log_tail(3.0) + 9.0) < 1e-8);
    CHECK(std::fabs(exponential_law(2.0).log_tail(1.25) + 2.5) < 1e-12);

    // threshold: all mass above u0
    JumpLaw shifted = hazard_law([](double v) { return v; }, 1.0);
    CHECK(shifted.tail(0.9) == 1.0);
    CHECK(shifted.tail(1.0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(hazard_law([](double v) { return v - 5.0; }, 0.0).log_tail(10.0), std::invalid_argument);
}

TEST_CASE("half-normal law") {
    JumpLaw hn = half_normal_law();
    CHECK(hn.kind() == LawKind::continuous_hazard);
    CHECK(hn.tail(1.0) == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))).epsilon(1e-10));
    CHECK(hn.log_tail(30.0) == doctest::Approx(std::log(2.0) + -454.32124395634320).epsilon(1e-9));
    CHECK(hn.has_hazard());
    // hazard of |N| is phi(v) / Phibar(v) * ... increasing
    CHECK(hn.hazard(2.0) < hn.hazard(3.0));
}

TEST_CASE("factorial law") {
    JumpLaw f1 = factorial_law(1.0);
    CHECK(mass_at(f1, 1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-13));
    CHECK(mass_at(f1, 1.0) == doctest::Approx(0.581976706869326).epsilon(1e-12));
    CHECK(mass_at(f1, 120.0) == doctest::Approx(1.0 / ((std::exp(1.0) - 1.0) * 120.0)).epsilon(1e-12));
    CHECK(std::fabs(total_mass(f1) - 1.0) < 1e-12);
    CHECK(f1.kind() == LawKind::discrete_general);

    // C(2) = 1 / sum 1/(n!)^2 = 0.78150319339738896 (series summed to 40 terms at 40 digits)
    JumpLaw f2 = factorial_law(2.0);
    CHECK(mass_at(f2, 2.0) == doctest::Approx(0.19537579834934724).epsilon(1e-13));
    CHECK(mass_at(f2, 1.0) == doctest::Approx(0.78150319339738896).epsilon(1e-13));
    CHECK(std::fabs(total_mass(f2) - 1.0) < 1e-12);
    // truncated mass below 1e-30
    CHECK(f1.log_truncated_mass() < std::log(1e-30));

    CHECK_THROWS_AS(factorial_law(0.5), std::invalid_argument);

    // tail bookkeeping: P(X > 1.5) = 1 - 1/(e-1)
    CHECK(f1.tail(1.5) == doctest::Approx(1.0 - 1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-13));
    CHECK(f1.log_tail_closed(2.0) == doctest::Approx(f1.log_tail(1.5)));
}

TEST_CASE("lattice and small discrete laws") {
    JumpLaw lf = lattice_factorial_law();
    CHECK(lf.kind() == LawKind::lattice);
    CHECK(lf.lattice_step() == Rational(1, 1));
    CHECK(mass_at(lf, 3.0) == doctest::Approx(1.0 / ((std::exp(1.0) - 1.0) * 6.0)).epsilon(1e-13));
    CHECK(std::fabs(total_mass(lf) - 1.0) < 1e-12);

    JumpLaw r = rademacher_law();
    CHECK(r.is_symmetric());
    CHECK(r.tail(0.0) == doctest::Approx(0.5));
    CHECK(r.lattice_step() == Rational(2, 1));

    JumpLaw g = geometric_law(0.25);
    CHECK(g.tail(3.0) == doctest::Approx(std::pow(0.75, 3)).epsilon(1e-12));

    JumpLaw d = discrete_law(std::vector<double>{-1.0, 0.5, 2.0}, {0.2, 0.3, 0.5});
    CHECK(d.tail(0.0) == doctest::Approx(0.8));
    CHECK_FALSE(d.is_symmetric());
    CHECK_THROWS_AS(discrete_law(std::vector<double>{1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);

    JumpLaw pt = point_law(2.5);
    CHECK(pt.upper_bound().value() == doctest::Approx(2.5));
}

TEST_CASE("discretize") {
    JumpLaw d = discretize(point_law(2.5), 1.0);
    REQUIRE(d.atoms().size() == 1);
    CHECK(d.value(d.atoms()[0]) == doctest::Approx(2.0));

    // uniform on (0,1): tail 1 - u on [0,1]
    JumpLaw uni = hazard_law_closed([](double v) { return v < 1.0 ? 1.0 / (1.0 - v) : 1e300; },
                                    [](double v) { return v < 1.0 ? -std::log1p(-v) : INFINITY; }, 0.0, "uniform");
    JumpLaw du = discretize(uni, 1.0);
    CHECK(mass_at(du, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    // half-normal at step 0.5: P(X^(a) = na) = 2 [Phi((n+1)a) - Phi(na)]
    JumpLaw hn = discretize(half_normal_law(), 0.5);
    for (int n = 0; n < 12; ++n) {
        double want = 2.0 * (phi_cdf((n + 1) * 0.5) - phi_cdf(n * 0.5));
        CHECK(std::fabs(mass_at(hn, n * 0.5) - want) < 1e-10);
    }

    // sandwich P(X^(a) > u) <= P(X > u) <= P(X^(a) > u - a)
    for (const JumpLaw& base : {half_normal_law(), exponential_law(1.0), linear_hazard_law()}) {
        JumpLaw lo = discretize(base, 0.25);
        for (double u = 0.0; u < 8.0; u += 0.37) {
            CHECK(lo.tail(u) <= base.tail(u) * (1 + 1e-10));
            CHECK(base.tail(u) <= lo.tail(u - 0.25) * (1 + 1e-10));
        }
        JumpLaw hi = discretize_upper(base, 0.25);
        for (double u = 0.0; u < 8.0; u += 0.37) CHECK(hi.tail(u) >= base.tail(u) * (1 - 1e-10));
    }
    CHECK_THROWS_AS(discretize(half_normal_law(), 0.0), std::invalid_argument);
}

TEST_CASE("from_levy_measure") {
    auto lm = from_levy_measure([](double x) { return std::exp(-x); }, 0.0, 1.0);
    CHECK(lm.lambda_plus == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(lm.law.tail(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(lm.law.tail(1.0) == doctest::Approx(1.0));
    CHECK(lm.law.tail(0.5) == doctest::Approx(1.0));

    auto pm = from_levy_measure([](double x) { return x < 3.0 ? 1.0 : 0.0; }, 0.0, 1.0);
    CHECK(pm.lambda_plus == doctest::Approx(1.0));
    CHECK(pm.law.tail(2.999) == doctest::Approx(1.0));
    CHECK(pm.law.tail(3.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(from_levy_measure([](double) { return 0.0; }, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("tail monotonicity and normalization across the zoo") {
    std::vector<JumpLaw> laws = {half_normal_law(),      exponential_law(0.7), linear_hazard_law(),
                                 power_hazard_law(1.5),  factorial_law(1.0),   factorial_law(1.7),
                                 lattice_factorial_law(), geometric_law(0.3),  rademacher_law(2.0),
                                 discretize(half_normal_law(), 0.1)};
    for (const auto& law : laws) {
        double prev = 1.0;
        for (double u = -1.0; u < 50.0; u += 0.73) {
            double t = law.tail(u);
            CHECK(t <= prev + 1e-15);
            prev = t;
        }
        if (law.is_discrete()) CHECK(std::fabs(total_mass(law) - 1.0) < 1e-12);
    }
}

TEST_CASE("classify_tail") {
    TailClass hn = classify_tail(half_normal_law());
    CHECK(hn.cond_pl);
    CHECK(hn.light1);
    CHECK_FALSE(hn.heavy);

    TailClass ex = classify_tail(exponential_law(1.0));
    CHECK_FALSE(ex.cond_pl);
    CHECK(ex.light1);
    CHECK_FALSE(ex.heavy);

    TailClass pt = classify_tail(point_law(1.0));
    CHECK(pt.light2);

    // the tail is flat between consecutive factorials, so neither light-tail ratio vanishes
    TailClass fl = classify_tail(factorial_law(1.0));
    CHECK_FALSE(fl.cond_pl);
    CHECK_FALSE(fl.light1);

    TailClass geo = classify_tail(geometric_law(0.5));
    CHECK_FALSE(geo.cond_pl);

    // cond_pl implies light1, heavy excludes cond_pl
    for (const auto& law : {half_normal_law(), exponential_law(2.0), linear_hazard_law(), lattice_factorial_law(),
                            geometric_law(0.2), point_law(3.0)}) {
        TailClass tc = classify_tail(law);
        if (tc.cond_pl) CHECK(tc.light1);
        if (tc.heavy) CHECK_FALSE(tc.cond_pl);
        CHECK(tc.cond_pl_trace.u.size() == tc.cond_pl_trace.ratio.size());
    }
}

TEST_CASE("check_cond_h") {
    std::vector<double> grid;
    for (int v = 10; v <= 100; ++v) grid.push_back(v);
    CondHResult lin = check_cond_h([](double v) { return v; }, 1.0, grid);
    CHECK(lin.holds);

    std::vector<double> g2;
    for (int v = 10; v <= 20; ++v) g2.push_back(v);
    // log h(v+1) = (v+1)^2 is far below e^{v^2}/8 on [10, 20], so the condition holds
    CondHResult fast = check_cond_h([](double v) { return std::exp(v * v); }, 1.0, g2);
    CHECK(fast.holds);
    CHECK(fast.worst_margin < 0.0);

    // log(v+3) <= (v+1)^{1/4} only from v of a few thousand on
    std::vector<double> g3;
    for (int v = 1; v <= 100000; v += 100) g3.push_back(v);
    CondHResult lg = check_cond_h([](double v) { return std::log(v + 1.0); }, 2.0, g3);
    CHECK(lg.holds);

    // with a tiny drift exp(b h / 8) stays near 1 and h(v + b) > 1 wins
    std::vector<double> g4;
    for (int v = 10; v <= 100; ++v) g4.push_back(v);
    CondHResult tiny = check_cond_h([](double v) { return v; }, 0.01, g4);
    CHECK_FALSE(tiny.holds);
    CHECK(tiny.worst_margin > 0.0);
}

TEST_CASE("check_lattice_cond") {
    // ratio ~ 1/(n+2) drops below 0.01 only past n = 98
    CHECK(check_lattice_cond(lattice_factorial_law(), 120).holds);
    CHECK_FALSE(check_lattice_cond(lattice_factorial_law(), 60).holds);
    LatticeCondResult geo = check_lattice_cond(geometric_law(0.4), 60);
    CHECK_FALSE(geo.holds);
    CHECK(geo.trace.ratio.back() == doctest::Approx(0.6).epsilon(1e-9));
    CHECK_FALSE(check_lattice_cond(point_law(1.0), 10).holds);
    CHECK_THROWS(check_lattice_cond(half_normal_law(), 10));
}

TEST_CASE("log-space helpers") {
    CHECK(log_add(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)));
    CHECK(log_add(kLogZero, -3.0) == -3.0);
    CHECK(log1mexp(std::log(0.25)) == doctest::Approx(std::log(0.75)));
    CHECK(log_sub(std::log(0.75), std::log(0.5)) == doctest::Approx(std::log(0.25)));
    LogSumAccumulator acc;
    for (int i = 0; i < 1000; ++i) acc.add(-800.0);
    CHECK(acc.value() == doctest::Approx(-800.0 + std::log(1000.0)));
    CHECK(log_factorial(10) == doctest::Approx(std::log(3628800.0)));
}
