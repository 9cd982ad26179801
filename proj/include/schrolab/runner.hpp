// runner.hpp
//
// Verb dispatch for the experiment runner and the command-line front end.
// Exit status: 0 all verdicts pass, 1 a verdict fails, 2 configuration
// error, 3 evaluation failure.

#pragma once

#include "schrolab/config.hpp"
#include "schrolab/report.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace schrolab {

struct SuiteResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// The lemma checks behind lemmas-verify.
std::vector<SuiteResult> lemma_suites(std::uint64_t seed, unsigned workers = 1);

struct PropagatorCheck {
    double max_rel_error = 0.0;
    std::vector<double> rel_errors;
};

// Factorized against direct evaluation of the case3 profile at random
// points of the box.
PropagatorCheck propagator_check(int d, double gamma, double R, std::size_t points, std::uint64_t seed);

struct RunReport {
    nlohmann::json report;   // deterministic in (config, seed)
    CsvTable records;
    nlohmann::json timings;  // wall clock, kept apart from the report
    bool pass = true;
};

nlohmann::json config_echo(const ExperimentConfig& cfg);

// Validates, dispatches and assembles the report.  Throws ConfigError on
// invalid configs and lets evaluation failures propagate.
RunReport execute(const ExperimentConfig& cfg);

// execute() plus <out>/report.json, <out>/records.csv and <out>/timings.json.
int run(const ExperimentConfig& cfg, std::ostream& log);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace schrolab
