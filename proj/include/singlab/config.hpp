#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "singlab/coeff_models.hpp"
#include "singlab/gevrey.hpp"

namespace singlab {

/// Parsed experiment configuration. Flat `key = value` file with bracketed
/// section headers; unknown sections or keys are errors. `inf` is accepted
/// for the exponents q and s; `phi = random` draws the oscillation phase from
/// the seeded generator and records it in the report.
struct ExperimentConfig {
    // [model]
    Family family = Family::Constant;
    double t0 = 1.0, T = 1.0, lambda0 = 0.0;
    double c = 1.0, gamma = 0.0, m = 0.0, phi = 0.0, theta = 1.0;
    bool phi_random = false;

    // [exponents]
    Exponents decl;

    // [plan]
    double z_margin = 0.5;
    std::optional<Regime> regime_override;

    // [xi]
    int kmin = 4, kmax = 10, per_dyad = 1;

    // [eps]
    double eps_min = 1e-4, eps_max = 1e-1;
    int eps_points = 16;

    // [data]
    GevreyProfile profile;

    // [tolerances]
    double tol = 1e-8;
    double quad_tol = 1e-6;
    double delta_cut_rel = 1e-8;  // delta_cut = delta_cut_rel * T
    double slope_tol = 0.15;
    double logslope_tol = 0.2;
    double retention_margin = 0.05;
    double slack_factor = 100.0;

    // [output]
    std::string out_dir = "out";
    int workers = 0;  // 0: SINGLAB_WORKERS env or hardware concurrency

    // runtime (CLI, not part of the file)
    std::uint64_t seed = 0;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Builds the validated coefficient model, drawing phi from the seeded
/// generator when requested (the drawn value is written back to cfg.phi).
CoefficientModel resolve_model(ExperimentConfig& cfg);

/// One line per key, the format parse_config reads back.
std::string config_help();

}  // namespace singlab
