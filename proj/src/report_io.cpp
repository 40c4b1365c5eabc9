#include "levytail/report_io.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace levytail {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string table_csv(const ExperimentReport& rep) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rep.rows) {
        const RatioRow& x = r.row;
        out += r.table;
        for (double v : {x.u, x.numerator, x.numerator_err, x.denominator, x.denominator_err, x.ratio, x.ratio_lo,
                         x.ratio_hi})
            out += "," + format_number(v);
        out += "," + x.method + "\n";
    }
    return out;
}

namespace {

json row_json(const ReportRow& r) {
    const RatioRow& x = r.row;
    return {{"table", r.table},
            {"u", x.u},
            {"numerator", x.numerator},
            {"numerator_err", x.numerator_err},
            {"denominator", x.denominator},
            {"denominator_err", x.denominator_err},
            {"ratio", x.ratio},
            {"ratio_lo", x.ratio_lo},
            {"ratio_hi", x.ratio_hi},
            {"method", x.method},
            {"numerator_hits", x.numerator_hits},
            {"low_confidence", x.low_confidence}};
}

// Collects every truncation certificate object found under "certificates"-like keys.
void gather_certificates(const json& j, const std::string& path, json& out) {
    if (j.is_object()) {
        if (j.contains("k_used") && j.contains("remainder_log_bound")) {
            out.push_back({{"stage", path}, {"certificate", j}});
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it) gather_certificates(it.value(), path + "/" + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) gather_certificates(j[i], path + "/" + std::to_string(i), out);
    }
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

json report_json(const ExperimentReport& rep) {
    json j;
    j["experiment"] = rep.id;
    j["model"] = rep.model;
    j["outcome"] = to_string(rep.outcome());
    j["hypotheses_verified"] = rep.hypotheses_verified;
    j["rows"] = json::array();
    for (const auto& r : rep.rows) j["rows"].push_back(row_json(r));
    j["verdicts"] = json::array();
    for (const auto& v : rep.verdicts)
        j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}, {"rows", v.rows}});
    j["notes"] = rep.notes;
    j["details"] = rep.details;
    j["provenance"] = rep.provenance;
    j["wall_time_s"] = rep.wall_time;
    return j;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_json(const RunConfig& cfg, const ExperimentReport& rep, const RunTimes& times,
                   const std::map<std::string, std::string>& digests) {
    json m;
    m["artifact"] = "levytail";
    m["artifact_version"] = kArtifactVersion;
    m["experiment"] = rep.id;
    m["config"] = cfg.echo;
    m["effective"] = {{"trials", cfg.sim.trials},
                      {"seed", cfg.sim.seed},
                      {"workers", cfg.sim.workers},
                      {"outdir", cfg.outdir},
                      {"model", rep.model}};
    m["tolerances"] = {{"exact_tol", rep.provenance.value("tol", 0.0)},
                       {"prune_eps_per_fold", kDefaultPruneEps},
                       {"support_cap", kDefaultSupportCap},
                       {"negligible_log", kNegligibleLog},
                       {"ci_z", kCiZ},
                       {"low_confidence_hits", kLowConfidenceHits},
                       {"mc_chunk_size", kChunkSize}};
    json certs = json::array();
    gather_certificates(rep.provenance, "provenance", certs);
    m["certificates"] = certs;
    m["provenance"] = rep.provenance;
    m["timestamps"] = {{"started", times.started}, {"finished", times.finished}};
    m["outcome"] = to_string(rep.outcome());
    m["digests_sha256"] = digests;
    return m;
}

void write_outputs(const std::string& outdir, const RunConfig& cfg, const ExperimentReport& rep,
                   const RunTimes& times) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + outdir + ": " + ec.message());
    const std::string csv = table_csv(rep);
    const std::string report = report_json(rep).dump(2) + "\n";
    write_file(fs::path(outdir) / "table.csv", csv);
    write_file(fs::path(outdir) / "report.json", report);
    std::map<std::string, std::string> digests = {{"table.csv", sha256_hex(csv)}, {"report.json", sha256_hex(report)}};
    write_file(fs::path(outdir) / "manifest.json", manifest_json(cfg, rep, times, digests).dump(2) + "\n");
}

ExperimentReport run_experiment(const RunConfig& cfg) {
    const std::string& id = cfg.experiment;
    if (id != "thm4" && !cfg.model) throw std::invalid_argument("experiment " + id + " needs a [model] section");
    if (id == "thm1") {
        Thm1Options o;
        if (cfg.u_grid) o.u_grid = *cfg.u_grid;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_thm1(*cfg.model, o);
    }
    if (id == "thm2") {
        Thm2Options o;
        if (cfg.u_grid) o.u_grid = *cfg.u_grid;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_thm2(*cfg.model, o);
    }
    if (id == "thm3") {
        Thm3Options o;
        if (cfg.n_range) o.n_range = *cfg.n_range;
        if (cfg.epsilon) o.epsilon = *cfg.epsilon;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_thm3(*cfg.model, o);
    }
    if (id == "thm4") {
        Thm4Options o;
        if (cfg.n_range) o.n_range = *cfg.n_range;
        if (cfg.v) o.v = *cfg.v;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_thm4(o);
    }
    if (id == "pl2") {
        Pl2Options o;
        if (cfg.u_grid) o.u_grid = *cfg.u_grid;
        if (cfg.alpha_grid) o.alpha_grid = *cfg.alpha_grid;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_prop_pl2(*cfg.model, o);
    }
    if (id == "main") {
        MainOptions o;
        if (cfg.u_grid) o.u_grid = *cfg.u_grid;
        if (cfg.tol) o.tol = *cfg.tol;
        o.sim = cfg.sim;
        return run_prop_main(*cfg.model, o);
    }
    if (id == "pl") {
        PlOptions o;
        if (cfg.u_grid) o.u_grid = *cfg.u_grid;
        if (cfg.a) o.a = *cfg.a;
        if (cfg.threshold) o.threshold = *cfg.threshold;
        if (cfg.tol) o.tol = *cfg.tol;
        return run_prop_pl(*cfg.model, o);
    }
    throw std::invalid_argument("unknown experiment '" + id + "'");
}

}  // namespace levytail
