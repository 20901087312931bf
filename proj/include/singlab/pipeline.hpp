#pragma once

#include <map>
#include <string>
#include <vector>

#include "singlab/config.hpp"
#include "singlab/mode_solver.hpp"

namespace singlab {

enum class Subcommand { Classify, Scaling, Gronwall, Propagate, All };
Subcommand subcommand_from_name(const std::string& name);

struct RunResult {
    std::string report_json;  // deterministic: identical config => identical bytes
    std::map<std::string, std::string> csv_files;
    bool pass = false;
};

/// Executes the selected pipeline stage(s) and assembles the report. Verdicts
/// are a pure function of the recorded numbers (see derive_verdicts).
/// Computational defects (certificate violations) are embedded in the report
/// with a failing verdict rather than aborting the remaining grid points.
RunResult run_experiment(ExperimentConfig cfg, Subcommand sub);

void write_outputs(const RunResult& result, const std::string& dir);

/// Recomputes the verdict map from a serialized report alone.
std::map<std::string, bool> derive_verdicts(const std::string& report_json);
bool derive_overall(const std::string& report_json);

std::vector<double> build_xi_grid(const ExperimentConfig& cfg);
std::vector<double> build_eps_grid(const ExperimentConfig& cfg);

/// classification with the config's regime override applied (declared sums
/// replace the canonical ones when forcing a regime)
HypothesisReport effective_report(const CoefficientModel& model, const ExperimentConfig& cfg);

}  // namespace singlab
