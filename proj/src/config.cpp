#include "levytail/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace levytail {

namespace {

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(x)) return std::nullopt;
    return x;
}

std::optional<long long> to_int(std::string_view s) {
    s = trim(s);
    long long x = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        // accept integral scientific notation such as 1e6
        auto d = to_double(s);
        if (d && *d == std::floor(*d) && std::fabs(*d) < 9e18) return static_cast<long long>(*d);
        return std::nullopt;
    }
    return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Descriptor parameters: key=value tokens after the law name.
struct LawParams {
    std::string law;
    std::map<std::string, std::string> kv;
    std::set<std::string> used;

    double num(const std::string& key, std::optional<double> fallback = std::nullopt) {
        used.insert(key);
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (fallback) return *fallback;
            throw std::invalid_argument(law + ": missing parameter " + key + "=");
        }
        auto x = to_double(it->second);
        if (!x) throw std::invalid_argument(law + ": parameter " + key + " is not a number: '" + it->second + "'");
        return *x;
    }

    std::vector<double> list(const std::string& key) {
        used.insert(key);
        auto it = kv.find(key);
        if (it == kv.end()) throw std::invalid_argument(law + ": missing parameter " + key + "=");
        std::vector<double> out;
        for (auto part : split(it->second, ',')) {
            auto x = to_double(part);
            if (!x) throw std::invalid_argument(law + ": bad number '" + std::string(part) + "' in " + key);
            out.push_back(*x);
        }
        return out;
    }

    void finish() const {
        for (const auto& [k, v] : kv)
            if (!used.count(k)) throw std::invalid_argument(law + ": unknown parameter " + k);
    }
};

JumpLaw build_law(LawParams& p) {
    const std::string& n = p.law;
    if (n == "hazard:linear") return linear_hazard_law();
    if (n == "hazard:power") return power_hazard_law(p.num("c"));
    if (n == "half-normal") return half_normal_law();
    if (n == "exponential") return exponential_law(p.num("rate", 1.0));
    if (n == "factorial") {
        double v = p.num("v", 1.0);
        if (!(v >= 1.0)) throw std::invalid_argument("v >= 1 required");
        return factorial_law(v);
    }
    if (n == "lattice-factorial") return lattice_factorial_law();
    if (n == "point") return point_law(p.num("value"));
    if (n == "rademacher") return rademacher_law(p.num("scale", 1.0));
    if (n == "geometric") return geometric_law(p.num("p"));
    if (n == "discrete") return discrete_law(p.list("values"), p.list("probs"));
    if (n == "discretize") {
        p.used.insert("base");
        auto it = p.kv.find("base");
        if (it == p.kv.end()) throw std::invalid_argument("discretize: missing parameter base=");
        if (it->second == "discretize") throw std::invalid_argument("discretize: base may not itself be discretize");
        double step = p.num("step");
        // remaining parameters belong to the base law
        LawParams base{it->second, {}, {}};
        for (const auto& [k, v] : p.kv)
            if (k != "base" && k != "step") {
                base.kv[k] = v;
                p.used.insert(k);
            }
        JumpLaw b = build_law(base);
        base.finish();
        return discretize(b, step);
    }
    throw std::invalid_argument("unknown law '" + n + "'");
}

template <class T, class Fn>
std::optional<std::vector<T>> parse_list(std::string_view s, Fn f) {
    std::vector<T> out;
    for (auto part : split(s, ',')) {
        // n_range accepts "lo..hi" as well as explicit lists
        if constexpr (std::is_same_v<T, int>) {
            auto dots = part.find("..");
            if (dots != std::string_view::npos) {
                auto lo = to_int(part.substr(0, dots)), hi = to_int(part.substr(dots + 2));
                if (!lo || !hi || *lo > *hi || *hi - *lo > 1000) return std::nullopt;
                for (long long i = *lo; i <= *hi; ++i) out.push_back(static_cast<int>(i));
                continue;
            }
        }
        auto x = f(part);
        if (!x) return std::nullopt;
        out.push_back(*x);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& e : errors) msg += "\n  " + e;
          return msg;
      }()),
      errors_(std::move(errors)) {}

JumpLaw parse_law(std::string_view descriptor) {
    std::istringstream in{std::string(trim(descriptor))};
    LawParams p;
    if (!(in >> p.law)) throw std::invalid_argument("empty law descriptor");
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
            throw std::invalid_argument("malformed law parameter '" + tok + "' (expected key=value)");
        if (!p.kv.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second)
            throw std::invalid_argument("duplicate law parameter " + tok.substr(0, eq));
    }
    JumpLaw law = build_law(p);
    p.finish();
    return law;
}

RunConfig parse_config(std::string_view text, std::string_view default_id) {
    std::vector<std::string> errors;
    std::map<std::string, std::pair<std::string, int>> kv;  // "section.key" -> value, line
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        // a comment may also follow a value after whitespace
        for (std::size_t i = 1; i < raw.size(); ++i)
            if ((raw[i] == '#' || raw[i] == ';') && std::isspace(static_cast<unsigned char>(raw[i - 1]))) {
                raw.resize(i);
                break;
            }
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back(where + "malformed section header");
                continue;
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "model" && section != "experiment") errors.push_back(where + "unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back(where + "expected key = value");
            continue;
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            errors.push_back(where + "empty key");
            continue;
        }
        if (section.empty()) {
            errors.push_back(where + "key '" + key + "' outside any section");
            continue;
        }
        std::string full = section + "." + key;
        if (!kv.emplace(full, std::make_pair(value, line_no)).second) errors.push_back(where + "duplicate key " + full);
    }

    static const std::set<std::string> known = {
        "model.sigma", "model.b", "model.lambda", "model.law", "model.bracket_step",
        "experiment.id", "experiment.u", "experiment.n_range", "experiment.alpha", "experiment.trials",
        "experiment.seed", "experiment.workers", "experiment.tol", "experiment.outdir", "experiment.epsilon",
        "experiment.v", "experiment.a", "experiment.threshold"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) errors.push_back("line " + std::to_string(v.second) + ": unknown key " + k);

    RunConfig cfg;
    for (const auto& [k, v] : kv) cfg.echo[k] = v.first;

    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second.first;
    };
    auto num = [&](const std::string& k) -> std::optional<double> {
        const std::string* s = get(k);
        if (!s) return std::nullopt;
        auto x = to_double(*s);
        if (!x) errors.push_back(k + ": not a number: '" + *s + "'");
        return x;
    };
    auto integer = [&](const std::string& k) -> std::optional<long long> {
        const std::string* s = get(k);
        if (!s) return std::nullopt;
        auto x = to_int(*s);
        if (!x) errors.push_back(k + ": not an integer: '" + *s + "'");
        return x;
    };

    std::string id;
    if (const std::string* s = get("experiment.id")) {
        id = *s;
        if (!default_id.empty() && id != default_id)
            errors.push_back("experiment.id '" + id + "' does not match requested experiment '" +
                             std::string(default_id) + "'");
    } else if (!default_id.empty()) {
        id = std::string(default_id);
        cfg.echo["experiment.id"] = id;
    } else {
        errors.push_back("experiment.id is required");
    }
    if (!id.empty()) {
        const auto& ids = experiment_ids();
        if (std::find(ids.begin(), ids.end(), id) == ids.end())
            errors.push_back("experiment.id: unknown experiment '" + id + "'");
        else
            cfg.experiment = id;
    }

    if (const std::string* s = get("experiment.u")) {
        cfg.u_grid = parse_list<double>(*s, [](std::string_view p) { return to_double(p); });
        if (!cfg.u_grid) errors.push_back("experiment.u: expected a comma-separated list of numbers");
    }
    if (const std::string* s = get("experiment.alpha")) {
        cfg.alpha_grid = parse_list<double>(*s, [](std::string_view p) { return to_double(p); });
        if (!cfg.alpha_grid) errors.push_back("experiment.alpha: expected a comma-separated list of numbers");
    }
    if (const std::string* s = get("experiment.n_range")) {
        auto as_int = [](std::string_view p) -> std::optional<int> {
            auto x = to_int(p);
            if (!x || *x < -1000000 || *x > 1000000) return std::nullopt;
            return static_cast<int>(*x);
        };
        cfg.n_range = parse_list<int>(*s, as_int);
        if (!cfg.n_range) errors.push_back("experiment.n_range: expected integers such as 4,5,6 or 4..7");
    }
    if (auto t = integer("experiment.trials")) {
        if (*t < 1) errors.push_back("experiment.trials must be >= 1");
        else cfg.sim.trials = static_cast<std::uint64_t>(*t);
    }
    if (auto s = integer("experiment.seed")) {
        if (*s < 0) errors.push_back("experiment.seed must be >= 0");
        else cfg.sim.seed = static_cast<std::uint64_t>(*s);
    }
    if (auto w = integer("experiment.workers")) {
        if (*w < 0 || *w > 4096) errors.push_back("experiment.workers must lie in [0, 4096]");
        else cfg.sim.workers = static_cast<unsigned>(*w);
    }
    if (auto t = num("experiment.tol")) {
        if (!(*t > 0.0 && *t < 1.0)) errors.push_back("experiment.tol must lie in (0, 1)");
        else cfg.tol = t;
    }
    if (auto e = num("experiment.epsilon")) {
        if (!(*e > 0.0)) errors.push_back("experiment.epsilon must be positive");
        else cfg.epsilon = e;
    }
    if (auto v = num("experiment.v")) {
        if (!(*v >= 1.0)) errors.push_back("experiment.v: v >= 1 required");
        else cfg.v = v;
    }
    if (auto a = num("experiment.a")) {
        if (!(*a > 0.0)) errors.push_back("experiment.a must be positive");
        else cfg.a = a;
    }
    if (auto th = num("experiment.threshold")) cfg.threshold = th;
    if (const std::string* o = get("experiment.outdir")) {
        if (o->empty()) errors.push_back("experiment.outdir must not be empty");
        else cfg.outdir = *o;
    }

    const bool has_model = get("model.sigma") || get("model.b") || get("model.lambda") || get("model.law") ||
                           get("model.bracket_step");
    if (cfg.experiment == "thm4") {
        if (has_model) errors.push_back("thm4 fixes its model (sigma=1, b=0, lambda=1, factorial jumps); remove [model]");
    } else if (!cfg.experiment.empty() || has_model) {
        LevyModel m{0.0, 0.0, 1.0, point_law(1.0)};
        auto sigma = num("model.sigma"), b = num("model.b"), lambda = num("model.lambda");
        auto step = num("model.bracket_step");
        if (!get("model.sigma")) errors.push_back("model.sigma is required");
        if (!get("model.lambda")) errors.push_back("model.lambda is required");
        if (sigma) {
            if (*sigma < 0.0) errors.push_back("sigma must be non-negative");
            m.sigma = *sigma;
        }
        if (b) m.drift_b = *b;
        if (lambda) {
            if (!(*lambda > 0.0)) errors.push_back("lambda must be positive");
            m.lambda = *lambda;
        }
        if (step) {
            if (!(*step > 0.0)) errors.push_back("model.bracket_step must be positive");
            m.bracket_step = *step;
        }
        bool law_ok = false;
        if (const std::string* law = get("model.law")) {
            cfg.law_descriptor = *law;
            try {
                m.jumps = parse_law(*law);
                law_ok = true;
            } catch (const std::exception& e) {
                errors.push_back(std::string("model.law: ") + e.what());
            }
        } else {
            errors.push_back("model.law is required");
        }
        if (law_ok && errors.empty()) cfg.model = m;
    }

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

RunConfig load_config(const std::string& path, std::string_view default_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw std::runtime_error("error reading config file " + path);
    return parse_config(ss.str(), default_id);
}

}  // namespace levytail
