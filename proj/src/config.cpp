#include "schrolab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace schrolab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    double out = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    long long out = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::size_t to_count(const std::string& key, const std::string& v)
{
    const long long n = to_integer(key, v);
    if (n < 0) throw ConfigError(key + ": must be non-negative");
    return static_cast<std::size_t>(n);
}

double power_term(const std::string& t)
{
    const auto caret = t.find('^');
    if (caret == std::string::npos) return to_double("ladder", t);
    return std::pow(to_double("ladder", t.substr(0, caret)), to_double("ladder", t.substr(caret + 1)));
}

}  // namespace

std::string verb_name(Verb v)
{
    switch (v) {
    case Verb::maximal_sweep: return "maximal-sweep";
    case Verb::counterexample: return "counterexample";
    case Verb::lemmas_verify: return "lemmas-verify";
    case Verb::propagator_check: return "propagator-check";
    }
    return "";
}

Verb parse_verb(const std::string& s)
{
    for (Verb v : {Verb::maximal_sweep, Verb::counterexample, Verb::lemmas_verify, Verb::propagator_check})
        if (verb_name(v) == s) return v;
    throw ConfigError("verb: unknown verb '" + s + "'");
}

std::vector<double> parse_ladder(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("ladder: empty");
    std::vector<double> out;
    const auto dots = t.find("..");
    if (dots != std::string::npos) {
        std::string hi = t.substr(dots + 2);
        double step = 1.0;
        if (const auto slash = hi.find('/'); slash != std::string::npos) {
            step = to_double("ladder", hi.substr(slash + 1));
            hi = hi.substr(0, slash);
        }
        const std::string lo = trim(t.substr(0, dots));
        hi = trim(hi);
        if (lo.rfind("2^", 0) != 0 || hi.rfind("2^", 0) != 0)
            throw ConfigError("ladder: ranges take the form 2^a..2^b[/step]");
        const double a = to_double("ladder", lo.substr(2)), b = to_double("ladder", hi.substr(2));
        if (!(step > 0.0) || b < a) throw ConfigError("ladder: empty or descending range");
        for (double e = a; e <= b + 1e-9; e += step) out.push_back(std::exp2(e));
    } else {
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(power_term(trim(item)));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) throw ConfigError("ladder: must be strictly increasing");
    return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
        table = {
            {"verb", [](auto& c, auto&, auto& v) { c.verb = parse_verb(trim(v)); }},
            {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_count(k, v)); }},
            {"workers", [](auto& c, auto& k, auto& v) { c.workers = static_cast<unsigned>(to_count(k, v)); }},
            {"ladder", [](auto& c, auto&, auto& v) { c.ladder = parse_ladder(v); }},
            {"output.dir", [](auto& c, auto&, auto& v) { c.out = trim(v); }},
            {"model.d", [](auto& c, auto& k, auto& v) { c.d = static_cast<int>(to_integer(k, v)); }},
            {"model.gamma", [](auto& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
            {"model.s", [](auto& c, auto& k, auto& v) { c.s = to_double(k, v); }},
            {"grid.space_count", [](auto& c, auto& k, auto& v) { c.space_count = static_cast<int>(to_integer(k, v)); }},
            {"grid.geometric", [](auto& c, auto& k, auto& v) { c.geometric = to_count(k, v); }},
            {"grid.spacing_factor", [](auto& c, auto& k, auto& v) { c.spacing_factor = to_double(k, v); }},
            {"grid.cap", [](auto& c, auto& k, auto& v) { c.cap = to_count(k, v); }},
            {"grid.tail", [](auto& c, auto& k, auto& v) { c.tail = to_count(k, v); }},
            {"grid.golden", [](auto& c, auto& k, auto& v) { c.golden = static_cast<int>(to_integer(k, v)); }},
            {"grid.truncation_tol", [](auto& c, auto& k, auto& v) { c.truncation_tol = to_double(k, v); }},
            {"maximal.family", [](auto& c, auto&, auto& v) { c.family = trim(v); }},
            {"ce.samples", [](auto& c, auto& k, auto& v) { c.samples = to_count(k, v); }},
            {"ce.budget", [](auto& c, auto&, auto& v) { c.budget = trim(v); }},
            {"ce.panels", [](auto& c, auto& k, auto& v) { c.panels = static_cast<int>(to_integer(k, v)); }},
            {"propagator.R", [](auto& c, auto& k, auto& v) { c.R = to_double(k, v); }},
            {"propagator.points", [](auto& c, auto& k, auto& v) { c.points = to_count(k, v); }},
        };
    static const std::vector<std::string> constant_keys{"c0", "c1", "c2", "c3", "c4", "delta0", "eps0", "c_delta0"};

    const std::string k = trim(key);
    if (const auto it = table.find(k); it != table.end()) {
        it->second(cfg, k, value);
        return;
    }
    if (k.rfind("ce.", 0) == 0 &&
        std::find(constant_keys.begin(), constant_keys.end(), k.substr(3)) != constant_keys.end()) {
        cfg.constants[k.substr(3)] = to_double(k, value);
        return;
    }
    throw ConfigError(k + ": unknown key");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base)
{
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        apply_setting(base, key, line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in, std::move(base));
}

void validate(const ExperimentConfig& cfg)
{
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(cfg.d >= 1 && cfg.d <= 4, "model.d: must lie in 1..4");
    require(cfg.gamma > 0.0 && std::isfinite(cfg.gamma), "model.gamma: must be positive");
    require(cfg.s >= 0.0 && std::isfinite(cfg.s), "model.s: must be non-negative");
    require(cfg.workers >= 1, "workers: must be at least 1");
    require(!cfg.out.empty(), "output.dir: must not be empty");

    switch (cfg.verb) {
    case Verb::maximal_sweep:
        require(cfg.ladder.size() >= 4, "ladder: maximal-sweep needs at least 4 R values");
        require(cfg.ladder.front() >= 1.0, "ladder: R must be >= 1");
        require(cfg.space_count >= 1, "grid.space_count: must be positive");
        require(cfg.geometric >= 1, "grid.geometric: must be positive");
        require(cfg.spacing_factor > 0.0, "grid.spacing_factor: must be positive");
        require(cfg.golden >= 0, "grid.golden: must be non-negative");
        require(cfg.truncation_tol >= 0.0, "grid.truncation_tol: must be non-negative");
        require(cfg.family == "case1" || cfg.family == "annulus", "maximal.family: expected case1 or annulus");
        break;
    case Verb::counterexample:
        require(cfg.d >= 2, "model.d: the counterexample needs d >= 2");
        require(cfg.gamma > 1.0, "model.gamma: the counterexample needs gamma > 1");
        require(cfg.ladder.size() >= 4, "ladder: counterexample needs at least 4 R values");
        require(cfg.samples >= 1, "ce.samples: must be positive");
        require(cfg.panels >= 1, "ce.panels: must be positive");
        require(cfg.budget == "record" || cfg.budget == "abort", "ce.budget: expected record or abort");
        for (const auto& [k, v] : cfg.constants) require(std::isfinite(v) && v >= 0.0, "ce." + k + ": must be non-negative");
        break;
    case Verb::propagator_check:
        require(cfg.R >= 16.0, "propagator.R: must be >= 16");
        require(cfg.points >= 1, "propagator.points: must be positive");
        break;
    case Verb::lemmas_verify: break;
    }
}

std::vector<double> default_ladder(Verb v)
{
    switch (v) {
    case Verb::maximal_sweep: return parse_ladder("2^4..2^7");
    case Verb::counterexample: return parse_ladder("2^16..2^24/2");
    default: return {};
    }
}

}  // namespace schrolab
