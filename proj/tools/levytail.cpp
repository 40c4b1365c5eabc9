#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "levytail/config.hpp"
#include "levytail/report_io.hpp"
#include "levytail/tail_class.hpp"

using namespace levytail;
using json = nlohmann::json;

namespace {

struct Overrides {
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> outdir;
    std::optional<double> tol;
    std::optional<unsigned> workers;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--trials", o.trials, "Monte Carlo paths")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--outdir", o.outdir, "output directory");
    cmd->add_option("--tol", o.tol, "relative tolerance for exact series")->check(CLI::Range(1e-300, 0.5));
    cmd->add_option("--workers", o.workers, "worker threads (0: all cores)");
}

void apply(const Overrides& o, RunConfig& cfg) {
    auto note = [&](const char* key, const std::string& v) { cfg.echo[std::string("cli.") + key] = v; };
    if (o.trials) { cfg.sim.trials = *o.trials; note("trials", std::to_string(*o.trials)); }
    if (o.seed) { cfg.sim.seed = *o.seed; note("seed", std::to_string(*o.seed)); }
    if (o.outdir) { cfg.outdir = *o.outdir; note("outdir", *o.outdir); }
    if (o.tol) { cfg.tol = *o.tol; note("tol", format_number(*o.tol)); }
    // workers never change results, so they stay out of the echo
    if (o.workers) cfg.sim.workers = *o.workers;
}

void print_trace(const char* label, const ProbeTrace& t) {
    std::printf("  %s:%s%s%s\n", label, t.inconclusive ? " (inconclusive)" : "", t.note.empty() ? "" : " ",
                t.note.c_str());
    for (std::size_t i = 0; i < t.u.size(); ++i) std::printf("    u=%-12.6g ratio=%.6e\n", t.u[i], t.ratio[i]);
}

int cmd_classify(const std::vector<std::string>& words) {
    std::string descriptor;
    for (const auto& w : words) descriptor += (descriptor.empty() ? "" : " ") + w;
    JumpLaw law = parse_law(descriptor);
    TailClass tc = classify_tail(law);
    std::printf("law: %s (%s)\n", law.name().c_str(), to_string(law.kind()));
    std::printf("light1=%s light2=%s cond_pl=%s heavy=%s lattice_cond=%s\n", tc.light1 ? "true" : "false",
                tc.light2 ? "true" : "false", tc.cond_pl ? "true" : "false", tc.heavy ? "true" : "false",
                tc.lattice_cond ? "true" : "false");
    if (tc.light2) std::printf("  light2: P(X > %g) >= %g\n", tc.light2_alpha, tc.light2_bound);
    print_trace("P(X1 > u) / P(X1 + X2 > u)", tc.light1_trace);
    print_trace("P(X > u + 1) / P(X > u)", tc.cond_pl_trace);
    if (law.kind() == LawKind::lattice) print_trace("P(X > (n+1)a) / P(X > na)", tc.lattice_trace);
    return 0;
}

struct RatioArgs {
    double sigma = 1.0, b = 0.0, lambda = 1.0;
    std::string law = "half-normal";
    std::vector<double> u = {2, 3, 4, 5, 6};
    std::string mode = "exact";
    std::string event = "supremum";
};

int cmd_ratio(const RatioArgs& a, const Overrides& o) {
    LevyModel model{a.sigma, a.b, a.lambda, parse_law(a.law)};
    model.validate();
    auto ev = event_from_string(a.event);
    if (!ev) throw std::invalid_argument("unknown event '" + a.event + "'");
    SimOptions sim;
    if (o.trials) sim.trials = *o.trials;
    if (o.seed) sim.seed = *o.seed;
    if (o.workers) sim.workers = *o.workers;
    const double tol = o.tol.value_or(1e-8);
    TailRatioCurve curve = ratio_curve(model, a.u, sim, a.mode == "mc" ? DenominatorMode::mc : DenominatorMode::exact,
                                       tol, *ev);
    ExperimentReport rep;
    rep.id = "ratio";
    rep.model = describe(model);
    for (const auto& r : curve.rows) rep.add_row("ratio", r);
    const std::string csv = table_csv(rep);
    std::fputs(csv.c_str(), stdout);
    if (o.outdir) {
        RunConfig cfg;
        cfg.experiment = "ratio";
        cfg.sim = sim;
        cfg.outdir = *o.outdir;
        cfg.echo = {{"model.sigma", format_number(a.sigma)}, {"model.b", format_number(a.b)},
                    {"model.lambda", format_number(a.lambda)}, {"model.law", a.law}, {"mode", a.mode},
                    {"event", a.event}};
        rep.provenance = {{"tol", tol}, {"certificates", json::array()}};
        for (const auto& c : curve.certificates)
            rep.provenance["certificates"].push_back({{"k_used", c.k_used},
                                                      {"log_poisson_remainder", c.log_poisson_remainder},
                                                      {"log_pruning_bound", c.log_pruning_bound},
                                                      {"remainder_log_bound", c.remainder_log_bound}});
        const std::string t = utc_now();
        write_outputs(*o.outdir, cfg, rep, {t, utc_now()});
    }
    for (const auto& r : curve.rows)
        if (r.low_confidence) return 3;
    return 0;
}

int cmd_verify(const std::string& id, const std::string& path, const Overrides& o) {
    RunConfig cfg = load_config(path, id);
    apply(o, cfg);
    RunTimes times;
    times.started = utc_now();
    ExperimentReport rep = run_experiment(cfg);
    times.finished = utc_now();
    write_outputs(cfg.outdir, cfg, rep, times);

    const Outcome out = rep.outcome();
    std::printf("%s: %s (%.1f s)\n", rep.id.c_str(), to_string(out), rep.wall_time);
    for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
    for (const auto& v : rep.verdicts) std::printf("  [%s] %s: %s\n", v.pass ? "pass" : "FAIL", v.name.c_str(), v.detail.c_str());
    std::printf("  wrote %s/{report.json,table.csv,manifest.json}\n", cfg.outdir.c_str());
    return exit_code(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail probabilities of Levy processes and their running suprema"};
    app.require_subcommand(1);

    std::vector<std::string> law_words;
    auto* classify = app.add_subcommand("classify", "tail classification of a jump law");
    classify->add_option("law", law_words, "law descriptor, e.g. factorial v=2")->required();

    RatioArgs ra;
    Overrides ro;
    auto* ratio = app.add_subcommand("ratio", "P(sup X > u) / P(X(1) > u) over a grid");
    ratio->add_option("--sigma", ra.sigma, "Brownian coefficient")->capture_default_str();
    ratio->add_option("--b", ra.b, "drift b in X = sigma B + Z - b t")->capture_default_str();
    ratio->add_option("--lambda", ra.lambda, "jump rate")->capture_default_str();
    ratio->add_option("--law", ra.law, "jump law descriptor")->capture_default_str();
    ratio->add_option("--u", ra.u, "levels")->delimiter(',');
    ratio->add_option("--mode", ra.mode, "denominator: exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    ratio->add_option("--event", ra.event, "numerator event")->capture_default_str();
    add_overrides(ratio, ro);

    std::string id, config_path;
    Overrides vo;
    auto* verify = app.add_subcommand("verify", "run one experiment from a config file");
    verify->add_option("experiment", id, "thm1|thm2|thm3|thm4|pl|pl2|main")
        ->required()
        ->check(CLI::IsMember(experiment_ids()));
    verify->add_option("config", config_path, "config file")->required();
    add_overrides(verify, vo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*classify) return cmd_classify(law_words);
        if (*ratio) return cmd_ratio(ra, ro);
        if (*verify) return cmd_verify(id, config_path, vo);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
