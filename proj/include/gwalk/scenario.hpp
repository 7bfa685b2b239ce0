#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwalk/asymptotics.hpp"

namespace gwalk {

// exit-code discipline: pass / check failure / config parse error /
// inconclusive (budget exhaustion or missing inputs) are distinguishable
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitParseError = 2;
inline constexpr int kExitInconclusive = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// configuration model

struct EstimatorSpec {
    std::string kind;
    std::map<std::string, std::string> params;
};

struct CheckSpec {
    std::string kind;
    std::map<std::string, std::string> params;
};

struct ScenarioConfig {
    std::string name = "unnamed";
    std::string group_str;
    std::string measure_str;
    uint64_t seed = 1;
    uint64_t budget_atoms = MeasureLimits{}.budget_atoms;
    uint64_t budget_steps = 2'000'000'000;
    // execution details that must not influence the artifact bytes
    int threads = 1;
    std::string out_dir;
    std::vector<EstimatorSpec> estimators;
    std::vector<CheckSpec> checks;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline const std::map<std::string, std::map<std::string, std::string>>&
estimator_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> d = {
        {"speed-trajectory", {{"metric", "green"}, {"n", "10000"},
                              {"trials", "10000"}}},
        {"entropy-convolution", {{"n-max", "12"}}},
        {"entropy-pointwise", {{"n", "10"}, {"trials", "10000"}}},
        {"speed-integral", {{"samples", "100000"}}},
        {"entropy-integral", {{"samples", "100000"}}},
        {"ball-growth", {{"metric", "green"}, {"radius-max", "8"},
                         {"radii", ""}}},
        {"heat-kernel", {{"k-max", "200"}}},
    };
    return d;
}

inline const std::map<std::string, std::map<std::string, std::string>>&
check_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> d = {
        {"overlap", {}},
        {"speed-entropy-order", {{"speed", "green-speed-trajectory"},
                                 {"entropy", "entropy-convolution"}}},
        {"zero-set", {{"radius", "6"}, {"range", "20"}}},
        {"fundamental-inequality",
         {{"entropy", "entropy-convolution"},
          {"speed", "word-speed-trajectory"},
          {"volume", "word-ball-slope"}}},
        {"decomposition", {{"n", "8"}, {"metric", "word"},
                           {"speed", "word-speed-trajectory"},
                           {"speed-value", ""}, {"eps", ""}, {"k", ""}}},
        {"heat-kernel-slope", {{"lo", "-1.6"}, {"hi", "-1.4"}}},
        {"ball-growth-slope", {{"slope", "green-ball-slope"}, {"lo", "2.5"},
                               {"hi", "3.3"}}},
        {"maximal-inequality", {{"a", "1.5,3,9,27"}, {"trajectories", "100000"},
                                {"horizon", "1000"}}},
    };
    return d;
}

inline uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + what + ": '" + s + "'");
    }
}

inline double parse_f64(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + what + ": '" + s + "'");
    }
}

inline std::vector<double> parse_list(const std::string& s,
                                      const std::string& what) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(parse_f64(cur, what));
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

// merge declared params over the kind's defaults, rejecting unknown keys
inline std::map<std::string, std::string> resolve_params(
    const std::string& kind, const std::map<std::string, std::string>& given,
    const std::map<std::string, std::map<std::string, std::string>>& table,
    const char* what) {
    auto it = table.find(kind);
    if (it == table.end())
        throw ConfigError(std::string("unknown ") + what + " '" + kind + "'");
    std::map<std::string, std::string> out = it->second;
    for (auto& [k, v] : given) {
        if (out.find(k) == out.end())
            throw ConfigError(std::string(what) + " '" + kind +
                              "' has no parameter '" + k + "'");
        out[k] = v;
    }
    return out;
}

}  // namespace detail

// Parse an INI-style scenario config: a [scenario] section plus one
// [estimator:<kind>] / [check:<kind>] section per requested computation.
// '#' and ';' start comments.  Unknown sections, estimator/check kinds, or
// parameter keys are rejected here, not at run time.
inline ScenarioConfig parse_scenario_config(const std::string& text) {
    ScenarioConfig cfg;
    enum class Sect { none, scenario, estimator, check } sect = Sect::none;
    size_t active = 0;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + msg);
        };
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (name == "scenario") {
                sect = Sect::scenario;
            } else if (name.rfind("estimator:", 0) == 0) {
                cfg.estimators.push_back(
                    {detail::trim(name.substr(10)), {}});
                sect = Sect::estimator;
                active = cfg.estimators.size() - 1;
            } else if (name.rfind("check:", 0) == 0) {
                cfg.checks.push_back({detail::trim(name.substr(6)), {}});
                sect = Sect::check;
                active = cfg.checks.size() - 1;
            } else {
                fail("unknown section [" + name + "]");
            }
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        switch (sect) {
            case Sect::none:
                fail("key-value outside any section");
                break;
            case Sect::scenario:
                if (key == "name") cfg.name = val;
                else if (key == "group") cfg.group_str = val;
                else if (key == "measure") cfg.measure_str = val;
                else if (key == "seed") cfg.seed = detail::parse_u64(val, "seed");
                else if (key == "budget-atoms")
                    cfg.budget_atoms = detail::parse_u64(val, "budget-atoms");
                else if (key == "budget-steps")
                    cfg.budget_steps = detail::parse_u64(val, "budget-steps");
                else if (key == "threads")
                    cfg.threads = int(detail::parse_u64(val, "threads"));
                else if (key == "out") cfg.out_dir = val;
                else fail("unknown scenario key '" + key + "'");
                break;
            case Sect::estimator:
                cfg.estimators[active].params[key] = val;
                break;
            case Sect::check:
                cfg.checks[active].params[key] = val;
                break;
        }
    }

    // semantic validation, all still parse-time
    if (cfg.group_str.empty()) throw ConfigError("missing scenario group");
    if (cfg.measure_str.empty()) throw ConfigError("missing scenario measure");
    GroupSpec g;
    StepMeasure* probe = nullptr;
    (void)probe;
    try {
        g = parse_group(cfg.group_str);
        StepMeasure m = parse_measure(g, cfg.measure_str);
        (void)m;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad group/measure: ") + e.what());
    }
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    for (auto& est : cfg.estimators)
        est.params = detail::resolve_params(est.kind, est.params,
                                            detail::estimator_defaults(),
                                            "estimator");
    for (auto& chk : cfg.checks)
        chk.params = detail::resolve_params(chk.kind, chk.params,
                                            detail::check_defaults(), "check");
    bool is_free = g.kind == GroupKind::Free;
    for (auto& est : cfg.estimators) {
        const auto& p = est.params;
        if ((est.kind == "speed-integral" || est.kind == "entropy-integral") &&
            !is_free)
            throw ConfigError("estimator '" + est.kind +
                              "' needs a free group");
        if (est.kind == "heat-kernel" && is_free)
            throw ConfigError("estimator 'heat-kernel' needs a lattice group");
        // numeric sanity now, not at run time
        if (est.kind == "speed-trajectory") {
            if (detail::parse_u64(p.at("n"), "n") < 10)
                throw ConfigError("speed-trajectory needs n >= 10");
            if (detail::parse_u64(p.at("trials"), "trials") < 2)
                throw ConfigError("speed-trajectory needs trials >= 2");
        } else if (est.kind == "entropy-convolution") {
            if (detail::parse_u64(p.at("n-max"), "n-max") < 4)
                throw ConfigError("entropy-convolution needs n-max >= 4");
        } else if (est.kind == "entropy-pointwise") {
            if (detail::parse_u64(p.at("n"), "n") < 6)
                throw ConfigError("entropy-pointwise needs n >= 6");
            if (detail::parse_u64(p.at("trials"), "trials") < 2)
                throw ConfigError("entropy-pointwise needs trials >= 2");
        } else if (est.kind == "speed-integral" ||
                   est.kind == "entropy-integral") {
            if (detail::parse_u64(p.at("samples"), "samples") < 2)
                throw ConfigError(est.kind + " needs samples >= 2");
        } else if (est.kind == "ball-growth") {
            if (!p.at("radii").empty()) {
                if (detail::parse_list(p.at("radii"), "radii").size() < 3)
                    throw ConfigError("ball-growth needs >= 3 radii");
            } else if (detail::parse_u64(p.at("radius-max"), "radius-max") < 3) {
                throw ConfigError("ball-growth needs radius-max >= 3");
            }
        } else if (est.kind == "heat-kernel") {
            if (detail::parse_u64(p.at("k-max"), "k-max") < 10)
                throw ConfigError("heat-kernel needs k-max >= 10");
        }
    }
    for (auto& chk : cfg.checks)
        if (chk.kind == "maximal-inequality" && !is_free)
            throw ConfigError("check 'maximal-inequality' needs a free group");
    return cfg;
}

// canonical INI dump of the semantic configuration (threads and output
// location are execution details and deliberately excluded, so artifact
// bytes cannot depend on them)
inline std::string dump_scenario_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << cfg.name << "\n";
    out << "group = " << cfg.group_str << "\n";
    out << "measure = " << cfg.measure_str << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "budget-atoms = " << cfg.budget_atoms << "\n";
    out << "budget-steps = " << cfg.budget_steps << "\n";
    for (auto& est : cfg.estimators) {
        out << "\n[estimator:" << est.kind << "]\n";
        for (auto& [k, v] : est.params) out << k << " = " << v << "\n";
    }
    for (auto& chk : cfg.checks) {
        out << "\n[check:" << chk.kind << "]\n";
        for (auto& [k, v] : chk.params) out << k << " = " << v << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// bundled scenarios

struct BundledScenario {
    std::string name;
    std::string description;
    std::string ini;
};

inline const std::vector<BundledScenario>& bundled_scenarios() {
    static const std::vector<BundledScenario> list = {
        {"f2-theorem11",
         "F_2 SRW: Green speed and entropy estimators agree (h = l_G)",
         "[scenario]\n"
         "name = f2-theorem11\n"
         "group = F_2\n"
         "measure = srw\n"
         "seed = 746502191\n"
         "[estimator:speed-trajectory]\n"
         "metric = green\n"
         "n = 10000\n"
         "trials = 10000\n"
         "[estimator:entropy-convolution]\n"
         "n-max = 12\n"
         "[estimator:entropy-pointwise]\n"
         "n = 10\n"
         "trials = 10000\n"
         "[estimator:speed-integral]\n"
         "samples = 100000\n"
         "[estimator:entropy-integral]\n"
         "samples = 100000\n"
         "[check:overlap]\n"
         "[check:speed-entropy-order]\n"},
        {"f3-theorem11",
         "F_3 SRW: Green speed and entropy estimators agree (h = l_G)",
         "[scenario]\n"
         "name = f3-theorem11\n"
         "group = F_3\n"
         "measure = srw\n"
         "seed = 746502192\n"
         "[estimator:speed-trajectory]\n"
         "metric = green\n"
         "n = 10000\n"
         "trials = 10000\n"
         "[estimator:entropy-convolution]\n"
         "n-max = 12\n"
         "[estimator:entropy-pointwise]\n"
         "n = 10\n"
         "trials = 10000\n"
         "[estimator:speed-integral]\n"
         "samples = 100000\n"
         "[estimator:entropy-integral]\n"
         "samples = 100000\n"
         "[check:overlap]\n"
         "[check:speed-entropy-order]\n"},
        {"z3-theorem11",
         "Z^3 SRW: degenerate case, h = l_G = 0 and the exact entropy split",
         "[scenario]\n"
         "name = z3-theorem11\n"
         "group = Z^3\n"
         "measure = srw\n"
         "seed = 746502193\n"
         "[estimator:speed-trajectory]\n"
         "metric = green\n"
         "n = 10000\n"
         "trials = 10000\n"
         "[estimator:entropy-convolution]\n"
         "n-max = 12\n"
         "[estimator:entropy-pointwise]\n"
         "n = 10\n"
         "trials = 10000\n"
         "[check:overlap]\n"
         "[check:speed-entropy-order]\n"
         "[check:zero-set]\n"
         "radius = 6\n"
         "[check:decomposition]\n"
         "n = 8\n"
         "metric = word\n"
         "speed-value = 0\n"},
        {"biasedz-remark22",
         "biased Z (p=2/3): one-sided Green distance, zero set = drift "
         "direction",
         "[scenario]\n"
         "name = biasedz-remark22\n"
         "group = Z^1\n"
         "measure = biased(0.6666666666666666)\n"
         "seed = 746502194\n"
         "[estimator:speed-trajectory]\n"
         "metric = green\n"
         "n = 10000\n"
         "trials = 10000\n"
         "[estimator:entropy-convolution]\n"
         "n-max = 12\n"
         "[estimator:entropy-pointwise]\n"
         "n = 10\n"
         "trials = 10000\n"
         "[check:overlap]\n"
         "[check:speed-entropy-order]\n"
         "[check:zero-set]\n"
         "range = 20\n"},
        {"f2-fundamental-ineq",
         "F_2 SRW: h <= l*v for word and Green metrics, with the entropy "
         "decomposition",
         "[scenario]\n"
         "name = f2-fundamental-ineq\n"
         "group = F_2\n"
         "measure = srw\n"
         "seed = 746502195\n"
         "[estimator:entropy-convolution]\n"
         "n-max = 12\n"
         "[estimator:speed-trajectory]\n"
         "metric = word\n"
         "n = 4000\n"
         "trials = 5000\n"
         "[estimator:speed-trajectory]\n"
         "metric = green\n"
         "n = 4000\n"
         "trials = 5000\n"
         "[estimator:ball-growth]\n"
         "metric = word\n"
         "radius-max = 8\n"
         "[estimator:ball-growth]\n"
         "metric = green\n"
         "radius-max = 8\n"
         "[check:fundamental-inequality]\n"
         "entropy = entropy-convolution\n"
         "speed = word-speed-trajectory\n"
         "volume = word-ball-slope\n"
         "[check:fundamental-inequality]\n"
         "entropy = entropy-convolution\n"
         "speed = green-speed-trajectory\n"
         "volume = green-ball-slope\n"
         "[check:speed-entropy-order]\n"
         "speed = green-speed-trajectory\n"
         "entropy = entropy-convolution\n"
         "[check:decomposition]\n"
         "n = 8\n"
         "metric = word\n"
         "speed = word-speed-trajectory\n"},
        {"z3-heatkernel",
         "Z^3 SRW: exact return probabilities decay like k^{-3/2}; Green "
         "balls grow cubically",
         "[scenario]\n"
         "name = z3-heatkernel\n"
         "group = Z^3\n"
         "measure = srw\n"
         "seed = 746502196\n"
         "[estimator:heat-kernel]\n"
         "k-max = 200\n"
         "[estimator:ball-growth]\n"
         "metric = green\n"
         "radii = 3.0,3.4,3.8,4.2,4.6,5.0\n"
         "[check:heat-kernel-slope]\n"
         "lo = -1.6\n"
         "hi = -1.4\n"
         "[check:ball-growth-slope]\n"
         "slope = green-ball-slope\n"
         "lo = 2.5\n"
         "hi = 3.3\n"},
        {"f2-maximal-ineq",
         "F_2 SRW: empirical Martin-kernel sup tails sit below 1/a",
         "[scenario]\n"
         "name = f2-maximal-ineq\n"
         "group = F_2\n"
         "measure = srw\n"
         "seed = 746502197\n"
         "[check:maximal-inequality]\n"
         "a = 1.5,3,9,27\n"
         "trajectories = 100000\n"
         "horizon = 1000\n"},
    };
    return list;
}

inline const BundledScenario* find_bundled_scenario(const std::string& name) {
    for (auto& b : bundled_scenarios())
        if (b.name == name) return &b;
    return nullptr;
}

// ---------------------------------------------------------------------------
// ball enumeration helpers

// number of elements with word length <= r
inline uint64_t word_ball_count(const GroupSpec& g, int r) {
    if (r < 0) throw std::invalid_argument("radius must be >= 0");
    if (g.kind == GroupKind::Free) {
        uint64_t q = 2ull * g.param - 1, sphere = 2ull * g.param, total = 1;
        for (int i = 0; i < r; ++i) {
            total += sphere;
            sphere *= q;
        }
        return total;
    }
    // l1 ball in Z^d: sum_i 2^i C(d,i) C(r,i)
    uint64_t total = 0;
    int d = g.param;
    for (int i = 0; i <= std::min(d, r); ++i) {
        uint64_t term = 1ull << i;
        for (int j = 0; j < i; ++j) term = term * uint64_t(d - j) / uint64_t(j + 1);
        for (int j = 0; j < i; ++j) term = term * uint64_t(r - j) / uint64_t(j + 1);
        total += term;
    }
    return total;
}

namespace detail {

inline void enum_free_ball(const GroupSpec& g, int r, Element& cur,
                           std::vector<Element>& out) {
    out.push_back(cur);
    if (r == 0) return;
    int k = g.param;
    for (int32_t l = -k; l <= k; ++l) {
        if (l == 0) continue;
        if (!cur.data.empty() && cur.data.back() == -l) continue;  // stay reduced
        cur.data.push_back(l);
        enum_free_ball(g, r - 1, cur, out);
        cur.data.pop_back();
    }
}

// all elements with word length <= r (free: reduced words; lattice: l1 ball)
inline std::vector<Element> ball_elements(const GroupSpec& g, int r) {
    std::vector<Element> out;
    if (g.kind == GroupKind::Free) {
        Element e = identity(g);
        enum_free_ball(g, r, e, out);
        return out;
    }
    if (g.param > 3)
        throw std::invalid_argument("ball enumeration covers d <= 3");
    Element x = identity(g);
    if (g.param == 1) {
        for (int a = -r; a <= r; ++a) {
            x.data[0] = a;
            out.push_back(x);
        }
        return out;
    }
    if (g.param == 2) {
        for (int a = -r; a <= r; ++a)
            for (int b = -r + std::abs(a); b <= r - std::abs(a); ++b) {
                x.data[0] = a;
                x.data[1] = b;
                out.push_back(x);
            }
        return out;
    }
    for (int a = -r; a <= r; ++a)
        for (int b = -r + std::abs(a); b <= r - std::abs(a); ++b) {
            int rem = r - std::abs(a) - std::abs(b);
            for (int c = -rem; c <= rem; ++c) {
                x.data[0] = a;
                x.data[1] = b;
                x.data[2] = c;
                out.push_back(x);
            }
        }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// runner

struct ReportRow {
    std::string name;
    std::string kind;  // "speed" | "entropy" | "slope" | "constant"
    Estimate est;
};

struct ReportCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double sigma = 0.0;
    std::string verdict;  // pass | fail | pass-with-proxy-caveat | inconclusive
    std::string note;     // summary.txt only; not part of the JSON schema
};

struct ScenarioArtifacts {
    int exit_code = kExitPass;
    std::string status;  // pass | check-failed | inconclusive
    std::string report_json;
    std::string ladders_csv;
    std::string summary_txt;
};

namespace detail {

inline std::string fmt_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline const char* bias_name(Bias b) {
    switch (b) {
        case Bias::downward: return "downward";
        case Bias::upward: return "upward";
        default: return "two-sided";
    }
}

struct LadderSeries {
    std::string series;
    std::vector<std::pair<double, double>> points;
};

// execution state shared by the estimator and check drivers
struct RunState {
    GroupSpec g;
    StepMeasure m;
    MeasureLimits limits;
    std::optional<GreenOracle> oracle;
    std::vector<ReportRow> rows;
    std::vector<LadderSeries> ladders;
    std::vector<ReportCheck> checks;
    std::vector<std::string> notes;
    bool inconclusive = false;

    RunState(const GroupSpec& gg, StepMeasure mm) : g(gg), m(std::move(mm)) {}

    const ReportRow* find_row(const std::string& name) const {
        for (auto& r : rows)
            if (r.name == name) return &r;
        return nullptr;
    }

    void note_inconclusive(const std::string& what) {
        inconclusive = true;
        notes.push_back(what);
    }
};

inline GreenMethod pick_oracle_method(const GroupSpec& g,
                                      const MeasureProfile& pr) {
    if (pr.kind == MeasureProfile::Kind::free_uniform ||
        pr.kind == MeasureProfile::Kind::z_nearest)
        return GreenMethod::closed_form;
    if (pr.kind == MeasureProfile::Kind::z3_uniform)
        return GreenMethod::lattice_dp;
    (void)g;
    throw ConfigError("no Green oracle available for this group/measure");
}

inline const GreenOracle& require_oracle(RunState& st) {
    if (!st.oracle) {
        MeasureProfile pr = profile_measure(st.g, st.m);
        if (!profile_transient(pr))
            throw ConfigError("walk is recurrent: Green metric unavailable");
        st.oracle = GreenOracle::make(st.g, st.m, pick_oracle_method(st.g, pr));
    }
    return *st.oracle;
}

}  // namespace detail

inline ScenarioArtifacts run_scenario(const ScenarioConfig& cfg) {
    using detail::fmt_double;
    using detail::json_escape;

    GroupSpec g = parse_group(cfg.group_str);
    detail::RunState st(g, parse_measure(g, cfg.measure_str));
    st.limits.budget_atoms = cfg.budget_atoms;

    // deterministic, config-derived step accounting: if the requested work
    // exceeds the step budget the scenario is inconclusive, never partial
    uint64_t steps_needed = 0;
    for (auto& est : cfg.estimators) {
        auto& p = est.params;
        if (est.kind == "speed-trajectory")
            steps_needed += detail::parse_u64(p.at("n"), "n") *
                            detail::parse_u64(p.at("trials"), "trials");
        else if (est.kind == "entropy-pointwise")
            steps_needed += detail::parse_u64(p.at("n"), "n") *
                            detail::parse_u64(p.at("trials"), "trials");
        else if (est.kind == "speed-integral" || est.kind == "entropy-integral")
            steps_needed +=
                128 * detail::parse_u64(p.at("samples"), "samples");
    }
    for (auto& chk : cfg.checks)
        if (chk.kind == "maximal-inequality")
            steps_needed +=
                detail::parse_u64(chk.params.at("trajectories"), "trajectories") *
                detail::parse_u64(chk.params.at("horizon"), "horizon");

    bool heat_available = false;
    HeatKernelReport heat;
    std::optional<std::pair<double, double>> green_ball_bracket;

    if (steps_needed > cfg.budget_steps) {
        st.note_inconclusive(
            "step budget exceeded: needs " + std::to_string(steps_needed) +
            ", budget " + std::to_string(cfg.budget_steps));
    } else {
        // ---- estimators ----
        for (size_t i = 0; i < cfg.estimators.size(); ++i) {
            const auto& est = cfg.estimators[i];
            const auto& p = est.params;
            Rng rng(derive_stream(cfg.seed, "estimator", i));
            try {
                if (est.kind == "speed-trajectory") {
                    const std::string& met = p.at("metric");
                    if (met != "word" && met != "green")
                        throw ConfigError("metric must be word or green");
                    MetricFn fn = met == "word"
                                      ? word_metric(st.g)
                                      : green_metric(detail::require_oracle(st));
                    uint64_t n = detail::parse_u64(p.at("n"), "n");
                    uint64_t trials = detail::parse_u64(p.at("trials"), "trials");
                    LimitEstimate le = speed_estimate(st.g, st.m, fn, n, trials, rng);
                    std::string name = met + "-speed-trajectory";
                    st.rows.push_back({name, "speed", le.as_estimate(trials)});
                    detail::LadderSeries s{name + ":mean-per-n", {}};
                    for (auto& [nn, v] : le.per_n) s.points.emplace_back(nn, v);
                    st.ladders.push_back(std::move(s));
                } else if (est.kind == "entropy-convolution") {
                    int n_max = int(detail::parse_u64(p.at("n-max"), "n-max"));
                    auto ladder = entropy_ladder(st.m, n_max, st.limits);
                    if (ladder.size() < 4) {
                        st.note_inconclusive(
                            "entropy-convolution: atom budget left only " +
                            std::to_string(ladder.size()) +
                            " ladder rows, too few to extrapolate");
                        continue;
                    }
                    LimitEstimate le = extrapolate_entropy(ladder);
                    if (int(ladder.size()) < n_max) {
                        le.extrapolation_method += "(partial-ladder)";
                        st.note_inconclusive(
                            "entropy-convolution: atom budget stopped the "
                            "ladder at n = " + std::to_string(ladder.size()));
                    }
                    st.rows.push_back(
                        {"entropy-convolution", "entropy", le.as_estimate()});
                    detail::LadderSeries sh{"entropy-convolution:H", {}};
                    detail::LadderSeries sn{"entropy-convolution:H-over-n", {}};
                    detail::LadderSeries si{"entropy-convolution:increment", {}};
                    for (size_t j = 0; j < ladder.size(); ++j) {
                        auto [nn, H] = ladder[j];
                        sh.points.emplace_back(nn, H);
                        sn.points.emplace_back(nn, H / nn);
                        if (j > 0)
                            si.points.emplace_back(nn, H - ladder[j - 1].second);
                    }
                    st.ladders.push_back(std::move(sh));
                    st.ladders.push_back(std::move(sn));
                    st.ladders.push_back(std::move(si));
                } else if (est.kind == "entropy-pointwise") {
                    int n = int(detail::parse_u64(p.at("n"), "n"));
                    uint64_t trials = detail::parse_u64(p.at("trials"), "trials");
                    LimitEstimate le = pointwise_entropy_ladder(
                        st.g, st.m, n, trials, rng, st.limits);
                    st.rows.push_back(
                        {"entropy-pointwise", "entropy", le.as_estimate(trials)});
                    detail::LadderSeries si{"entropy-pointwise:increment", {}};
                    for (auto& [nn, v] : le.per_n) si.points.emplace_back(nn, v);
                    st.ladders.push_back(std::move(si));
                } else if (est.kind == "speed-integral") {
                    uint64_t samples = detail::parse_u64(p.at("samples"), "samples");
                    st.rows.push_back({"green-speed-integral", "speed",
                                       green_speed_integral(st.g, st.m, samples,
                                                            rng)});
                } else if (est.kind == "entropy-integral") {
                    uint64_t samples = detail::parse_u64(p.at("samples"), "samples");
                    st.rows.push_back({"entropy-integral", "entropy",
                                       entropy_integral(st.g, st.m, samples,
                                                        rng)});
                } else if (est.kind == "ball-growth") {
                    const std::string& met = p.at("metric");
                    if (met == "word") {
                        int rmax = int(detail::parse_u64(p.at("radius-max"),
                                                         "radius-max"));
                        std::vector<std::pair<double, double>> counts;
                        detail::LadderSeries s{"word-ball:count", {}};
                        for (int r = 0; r <= rmax; ++r) {
                            double c = double(word_ball_count(st.g, r));
                            counts.emplace_back(double(r), c);
                            s.points.emplace_back(double(r), c);
                        }
                        double slope = log_volume_growth(counts);
                        st.rows.push_back({"word-ball-slope", "slope",
                                           Estimate(slope, 0.0, 1,
                                                    "exact-count-fit")});
                        st.ladders.push_back(std::move(s));
                    } else if (met == "green") {
                        const GreenOracle& o = detail::require_oracle(st);
                        std::vector<double> radii;
                        if (!p.at("radii").empty()) {
                            radii = detail::parse_list(p.at("radii"), "radii");
                        } else {
                            int rmax = int(detail::parse_u64(p.at("radius-max"),
                                                             "radius-max"));
                            double unit =
                                st.g.kind == GroupKind::Free
                                    ? std::log(2.0 * st.g.param - 1.0)
                                    : 1.0;
                            for (int r = 0; r <= rmax; ++r)
                                radii.push_back(unit * r);
                        }
                        std::vector<std::pair<double, double>> exact_counts;
                        std::vector<std::tuple<double, double, double>> brackets;
                        detail::LadderSeries slo{"green-ball:lower", {}};
                        detail::LadderSeries shi{"green-ball:upper", {}};
                        bool all_exact = true;
                        for (double R : radii) {
                            BallCount bc = green_ball_count(o, R);
                            all_exact = all_exact && bc.exact;
                            exact_counts.emplace_back(R, double(bc.lower));
                            brackets.emplace_back(R, double(bc.lower),
                                                  double(bc.upper));
                            slo.points.emplace_back(R, double(bc.lower));
                            shi.points.emplace_back(R, double(bc.upper));
                        }
                        if (all_exact) {
                            double slope = log_volume_growth(exact_counts);
                            st.rows.push_back({"green-ball-slope", "slope",
                                               Estimate(slope, 0.0, 1,
                                                        "exact-count-fit")});
                        } else {
                            auto [lo, hi] = log_volume_growth_bracket(brackets);
                            green_ball_bracket = {lo, hi};
                            st.rows.push_back(
                                {"green-ball-slope", "slope",
                                 Estimate(0.5 * (lo + hi), 0.5 * (hi - lo), 1,
                                          "bracketed-count-fit")});
                        }
                        st.ladders.push_back(std::move(slo));
                        st.ladders.push_back(std::move(shi));
                    } else {
                        throw ConfigError("metric must be word or green");
                    }
                } else if (est.kind == "heat-kernel") {
                    int k_max = int(detail::parse_u64(p.at("k-max"), "k-max"));
                    heat = heat_kernel_decay(st.g, st.m, k_max);
                    heat_available = true;
                    st.rows.push_back({"heat-kernel-slope", "slope",
                                       Estimate(heat.slope, 0.0, 1,
                                                "log-log-fit")});
                    st.rows.push_back({"heat-kernel-constant", "constant",
                                       Estimate(heat.c_fit, 0.0, 1,
                                                "max-normalized")});
                    detail::LadderSeries s{"heat-kernel:P", {}};
                    for (auto& [k, v] : heat.values)
                        s.points.emplace_back(double(k), v);
                    st.ladders.push_back(std::move(s));
                }
            } catch (const std::length_error& e) {
                st.note_inconclusive(est.kind + std::string(": ") + e.what());
            }
        }

        // ---- checks ----
        auto missing = [&st](const std::string& check,
                             const std::string& row) {
            ReportCheck c;
            c.name = check;
            c.verdict = "inconclusive";
            c.note = "estimator row '" + row + "' unavailable";
            st.checks.push_back(c);
            st.inconclusive = true;
        };
        for (size_t ci = 0; ci < cfg.checks.size(); ++ci) {
            const auto& chk = cfg.checks[ci];
            const auto& p = chk.params;
            if (chk.kind == "overlap") {
                for (auto& s : st.rows) {
                    if (s.kind != "speed") continue;
                    for (auto& h : st.rows) {
                        if (h.kind != "entropy") continue;
                        ReportCheck c;
                        c.name = "overlap:" + s.name + "|" + h.name;
                        c.lhs = s.est.value;
                        c.rhs = h.est.value;
                        c.sigma = s.est.sigma + h.est.sigma;
                        c.verdict = std::abs(c.lhs - c.rhs) <= 3.0 * c.sigma
                                        ? "pass"
                                        : "fail";
                        st.checks.push_back(c);
                    }
                }
            } else if (chk.kind == "speed-entropy-order") {
                const ReportRow* s = st.find_row(p.at("speed"));
                const ReportRow* h = st.find_row(p.at("entropy"));
                if (!s) { missing("speed-entropy-order", p.at("speed")); continue; }
                if (!h) { missing("speed-entropy-order", p.at("entropy")); continue; }
                CheckResult r = speed_entropy_order_check(s->est, h->est);
                st.checks.push_back({r.name, r.lhs, r.rhs, r.sigma,
                                     r.pass ? "pass" : "fail", r.note});
            } else if (chk.kind == "zero-set") {
                const GreenOracle& o = detail::require_oracle(st);
                Element e = identity(st.g);
                MeasureProfile pr = profile_measure(st.g, st.m);
                uint64_t violations = 0, tested = 0;
                if (st.g.kind == GroupKind::Lattice && st.g.param == 1 &&
                    std::abs(pr.p_up - 0.5) > 1e-12) {
                    // drift side must be at distance zero, the other not
                    int range = int(detail::parse_u64(p.at("range"), "range"));
                    int dir = pr.p_up > 0.5 ? 1 : -1;
                    Element x = identity(st.g);
                    for (int mm = 1; mm <= range; ++mm) {
                        x.data[0] = dir * mm;
                        if (o.green_distance(e, x) != 0.0) ++violations;
                        x.data[0] = -dir * mm;
                        if (!(o.green_distance(e, x) > 0.0)) ++violations;
                        tested += 2;
                    }
                } else {
                    int radius = int(detail::parse_u64(p.at("radius"), "radius"));
                    for (auto& x : detail::ball_elements(st.g, radius)) {
                        if (x == e) {
                            if (o.green_distance(e, x) != 0.0) ++violations;
                        } else if (!(o.green_distance(e, x) > 1e-9)) {
                            ++violations;
                        }
                        ++tested;
                    }
                }
                ReportCheck c;
                c.name = "zero-set";
                c.lhs = double(violations);
                c.rhs = 0.0;
                c.sigma = 0.0;
                c.verdict = violations == 0 ? "pass" : "fail";
                c.note = "tested " + std::to_string(tested) + " elements";
                st.checks.push_back(c);
            } else if (chk.kind == "fundamental-inequality") {
                const ReportRow* h = st.find_row(p.at("entropy"));
                const ReportRow* s = st.find_row(p.at("speed"));
                const ReportRow* v = st.find_row(p.at("volume"));
                if (!h) { missing("fundamental-inequality", p.at("entropy")); continue; }
                if (!s) { missing("fundamental-inequality", p.at("speed")); continue; }
                if (!v) { missing("fundamental-inequality", p.at("volume")); continue; }
                auto r = fundamental_inequality_check(h->est, s->est, v->est);
                ReportCheck c;
                c.name = "fundamental-inequality:" + s->name + "*" + v->name;
                c.lhs = r.entropy;
                c.rhs = r.speed * r.volume;
                c.sigma = r.sigma;
                c.verdict = verdict_name(r.verdict);
                c.note = r.note;
                st.checks.push_back(c);
            } else if (chk.kind == "decomposition") {
                int n = int(detail::parse_u64(p.at("n"), "n"));
                const std::string& met = p.at("metric");
                MetricFn fn = met == "word"
                                  ? word_metric(st.g)
                                  : green_metric(detail::require_oracle(st));
                double speed_val;
                if (!p.at("speed-value").empty()) {
                    speed_val = detail::parse_f64(p.at("speed-value"),
                                                  "speed-value");
                } else {
                    const ReportRow* s = st.find_row(p.at("speed"));
                    if (!s) { missing("decomposition", p.at("speed")); continue; }
                    speed_val = s->est.value;
                }
                DecompositionParams dp;
                if (!p.at("eps").empty())
                    dp.eps = detail::parse_f64(p.at("eps"), "eps");
                if (!p.at("k").empty()) dp.K = detail::parse_f64(p.at("k"), "k");
                try {
                    auto rep = entropy_decomposition(st.m, n, fn, speed_val, dp,
                                                     st.limits);
                    ReportCheck c1;
                    c1.name = "decomposition-identity";
                    c1.lhs = std::abs(rep.identity_residual);
                    c1.rhs = 1e-9;
                    c1.sigma = 0.0;
                    c1.verdict = c1.lhs <= c1.rhs ? "pass" : "fail";
                    c1.note = "terms " + fmt_double(rep.ball_term) + " + " +
                              fmt_double(rep.first_annulus_term) + " + " +
                              fmt_double(rep.annuli_sum) + " + " +
                              fmt_double(rep.h_prime) + " vs H = " +
                              fmt_double(rep.exact_entropy);
                    st.checks.push_back(c1);
                    ReportCheck c2;
                    c2.name = "decomposition-markov-bounds";
                    uint64_t viol = 0;
                    for (auto& a : rep.annuli)
                        if (!a.within) ++viol;
                    c2.lhs = double(viol);
                    c2.rhs = 0.0;
                    c2.verdict = rep.bounds_ok ? "pass" : "fail";
                    c2.note = std::to_string(rep.annuli.size()) +
                              " dyadic cells";
                    st.checks.push_back(c2);
                } catch (const std::length_error& e) {
                    ReportCheck c;
                    c.name = "decomposition-identity";
                    c.verdict = "inconclusive";
                    c.note = e.what();
                    st.checks.push_back(c);
                    st.inconclusive = true;
                }
            } else if (chk.kind == "heat-kernel-slope") {
                if (!heat_available) { missing("heat-kernel-slope", "heat-kernel-slope"); continue; }
                double lo = detail::parse_f64(p.at("lo"), "lo");
                double hi = detail::parse_f64(p.at("hi"), "hi");
                ReportCheck c;
                c.name = "heat-kernel-slope";
                c.lhs = heat.slope;
                c.rhs = 0.5 * (lo + hi);
                c.sigma = (hi - lo) / 6.0;
                c.verdict =
                    (heat.slope >= lo && heat.slope <= hi) ? "pass" : "fail";
                st.checks.push_back(c);
                double excess = 0.0;
                for (auto& [k, v] : heat.values) {
                    if (k < 1) continue;
                    excess = std::max(
                        excess, v - heat.c_fit * std::pow(double(k),
                                                          heat.slope_model));
                }
                ReportCheck c2;
                c2.name = "heat-kernel-bound";
                c2.lhs = excess;
                c2.rhs = 0.0;
                c2.sigma = 0.0;
                c2.verdict = excess <= 1e-15 ? "pass" : "fail";
                c2.note = "P(k) <= " + fmt_double(heat.c_fit) +
                          " k^" + fmt_double(heat.slope_model);
                st.checks.push_back(c2);
            } else if (chk.kind == "ball-growth-slope") {
                const ReportRow* s = st.find_row(p.at("slope"));
                if (!s) { missing("ball-growth-slope", p.at("slope")); continue; }
                double lo = detail::parse_f64(p.at("lo"), "lo");
                double hi = detail::parse_f64(p.at("hi"), "hi");
                double blo = s->est.value - s->est.sigma;
                double bhi = s->est.value + s->est.sigma;
                if (green_ball_bracket && p.at("slope") == "green-ball-slope") {
                    blo = green_ball_bracket->first;
                    bhi = green_ball_bracket->second;
                }
                ReportCheck c;
                c.name = "ball-growth-slope:" + s->name;
                c.lhs = s->est.value;
                c.rhs = 0.5 * (lo + hi);
                c.sigma = (hi - lo) / 6.0;
                c.verdict = (blo >= lo && bhi <= hi) ? "pass" : "fail";
                c.note = "bracket [" + fmt_double(blo) + ", " +
                         fmt_double(bhi) + "] within [" + fmt_double(lo) +
                         ", " + fmt_double(hi) + "]";
                st.checks.push_back(c);
            } else if (chk.kind == "maximal-inequality") {
                auto a_grid = detail::parse_list(p.at("a"), "a");
                uint64_t traj =
                    detail::parse_u64(p.at("trajectories"), "trajectories");
                uint64_t horizon = detail::parse_u64(p.at("horizon"), "horizon");
                Rng rng(derive_stream(cfg.seed, "check", ci));
                auto rep = maximal_inequality_check(st.g, st.m, a_grid, traj,
                                                    horizon, rng);
                for (auto& row : rep.rows) {
                    ReportCheck c;
                    c.name = "maximal-inequality:a=" + fmt_double(row.a);
                    c.lhs = row.empirical;
                    c.rhs = row.bound;
                    c.sigma = row.sigma;
                    c.verdict = row.ok ? "pass" : "fail";
                    st.checks.push_back(c);
                }
            }
        }
    }

    // ---- status and artifacts ----
    bool any_fail = false;
    for (auto& c : st.checks) {
        if (c.verdict == "fail") any_fail = true;
        if (c.verdict == "inconclusive") st.inconclusive = true;
    }

    ScenarioArtifacts art;
    if (any_fail) {
        art.status = "check-failed";
        art.exit_code = kExitCheckFailed;
    } else if (st.inconclusive) {
        art.status = "inconclusive";
        art.exit_code = kExitInconclusive;
    } else {
        art.status = "pass";
        art.exit_code = kExitPass;
    }

    {
        std::ostringstream js;
        js << "{\n";
        js << "  \"scenario\": \"" << json_escape(cfg.name) << "\",\n";
        js << "  \"group\": \"" << json_escape(cfg.group_str) << "\",\n";
        js << "  \"measure\": \"" << json_escape(cfg.measure_str) << "\",\n";
        js << "  \"seed\": " << cfg.seed << ",\n";
        js << "  \"stream_derivation\": \"derive_stream(seed, \\\"estimator\\\","
              " index); derive_stream(seed, \\\"check\\\", index)\",\n";
        js << "  \"effective_config\": \""
           << json_escape(dump_scenario_config(cfg)) << "\",\n";
        js << "  \"estimators\": [";
        for (size_t i = 0; i < st.rows.size(); ++i) {
            const auto& r = st.rows[i];
            js << (i ? ",\n" : "\n");
            js << "    {\"name\": \"" << json_escape(r.name) << "\", \"kind\": \""
               << r.kind << "\", \"value\": " << fmt_double(r.est.value)
               << ", \"sigma\": " << fmt_double(r.est.sigma)
               << ", \"n_samples\": " << r.est.n_samples << ", \"method\": \""
               << json_escape(r.est.method) << "\", \"bias\": \""
               << detail::bias_name(r.est.bias) << "\"}";
        }
        js << "\n  ],\n";
        js << "  \"checks\": [";
        for (size_t i = 0; i < st.checks.size(); ++i) {
            const auto& c = st.checks[i];
            js << (i ? ",\n" : "\n");
            js << "    {\"name\": \"" << json_escape(c.name)
               << "\", \"lhs\": " << fmt_double(c.lhs)
               << ", \"rhs\": " << fmt_double(c.rhs)
               << ", \"sigma\": " << fmt_double(c.sigma) << ", \"verdict\": \""
               << c.verdict << "\"}";
        }
        js << "\n  ],\n";
        js << "  \"status\": \"" << art.status << "\"\n";
        js << "}\n";
        art.report_json = js.str();
    }
    {
        std::ostringstream csv;
        csv << "series,x,value\n";
        for (auto& s : st.ladders)
            for (auto& [x, v] : s.points)
                csv << s.series << "," << fmt_double(x) << ","
                    << fmt_double(v) << "\n";
        art.ladders_csv = csv.str();
    }
    {
        std::ostringstream txt;
        txt << "scenario " << cfg.name << " (" << cfg.group_str << ", "
            << cfg.measure_str << ", seed " << cfg.seed << ")\n\n";
        txt << "estimators:\n";
        for (auto& r : st.rows)
            txt << "  " << r.name << " [" << r.kind
                << "] = " << fmt_double(r.est.value) << " +- "
                << fmt_double(r.est.sigma) << "  (" << r.est.method << ", "
                << r.est.n_samples << " samples)\n";
        if (st.rows.empty()) txt << "  (none)\n";
        txt << "\nchecks:\n";
        for (auto& c : st.checks) {
            txt << "  [" << c.verdict << "] " << c.name << ": lhs "
                << fmt_double(c.lhs) << ", rhs " << fmt_double(c.rhs)
                << ", sigma " << fmt_double(c.sigma) << "\n";
            if (!c.note.empty()) txt << "      " << c.note << "\n";
        }
        if (st.checks.empty()) txt << "  (none)\n";
        if (!st.notes.empty()) {
            txt << "\nnotes:\n";
            for (auto& n : st.notes) txt << "  " << n << "\n";
        }
        txt << "\nstatus: " << art.status << "\n";
        art.summary_txt = txt.str();
    }
    return art;
}

// default config template, also the show-defaults payload: every estimator
// and check kind with its default parameters
inline std::string default_config_text() {
    std::ostringstream out;
    out << "# scenario configuration template: every available estimator and\n"
           "# check with its default parameters.  A reference, not a runnable\n"
           "# scenario: boundary integrals and the maximal-inequality check\n"
           "# need a free group, the heat kernel needs a lattice.\n"
           "[scenario]\n"
           "name = unnamed\n"
           "group = F_2          # F_<k> or Z^<d>\n"
           "measure = srw        # srw | biased(p) | lazy(alpha, inner)\n"
           "seed = 1\n";
    ScenarioConfig defaults;
    out << "budget-atoms = " << defaults.budget_atoms << "\n";
    out << "budget-steps = " << defaults.budget_steps << "\n";
    for (auto& [kind, params] : detail::estimator_defaults()) {
        out << "\n[estimator:" << kind << "]\n";
        for (auto& [k, v] : params)
            out << k << " = " << v << "\n";
    }
    for (auto& [kind, params] : detail::check_defaults()) {
        out << "\n[check:" << kind << "]\n";
        for (auto& [k, v] : params)
            out << k << " = " << v << "\n";
    }
    return out.str();
}

}  // namespace gwalk
