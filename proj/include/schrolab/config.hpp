// config.hpp
//
// Experiment configuration: line-oriented "key = value" files with dotted
// section names, command-line overrides and field-level validation.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrolab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Verb { maximal_sweep, counterexample, lemmas_verify, propagator_check };

std::string verb_name(Verb v);
Verb parse_verb(const std::string& s);

struct ExperimentConfig {
    Verb verb = Verb::lemmas_verify;

    // model.*
    int d = 2;
    double gamma = 2.0;
    double s = 0.0;

    std::vector<double> ladder;

    // grid.*
    int space_count = 128;
    std::size_t geometric = 64;
    double spacing_factor = 0.25;
    std::size_t cap = std::size_t{1} << 14;
    std::size_t tail = 64;
    int golden = 30;
    double truncation_tol = 1e-6;

    // maximal.*
    std::string family = "case1";  // case1 | annulus

    // ce.*
    std::size_t samples = 10000;
    std::string budget = "record";  // record | abort
    int panels = 8;
    std::map<std::string, double> constants;  // c0..c4, delta0, eps0, c_delta0

    // propagator.*
    double R = 256.0;
    std::size_t points = 20;

    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out = "out";
};

// "16,32,64", "2^4..2^7" (doublings) or "2^16..2^24/2" (exponent step 2).
std::vector<double> parse_ladder(const std::string& text);

// Applies one key; throws ConfigError naming the key on unknown keys or
// malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// '#' starts a comment; "[section]" prefixes the following keys.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base = {});

// Verb-specific checks; the message names the offending field.
void validate(const ExperimentConfig& cfg);

// Default ladders per verb when none is given.
std::vector<double> default_ladder(Verb v);

}  // namespace schrolab
