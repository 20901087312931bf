#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "singlab/coeff_models.hpp"

namespace singlab {

/// Fourier-side initial data class: Gevrey decay exp(-delta |xi|^(1/sigma)) or,
/// for the C-infinity case, polynomial decay |xi|^(-zeta/2) (squared-sum
/// convention: |v0|^2 + |v1|^2 <= M^2 |xi|^(-zeta)).
struct GevreyProfile {
    enum class Kind { Gevrey, PolynomialDecay };
    Kind kind = Kind::Gevrey;
    double sigma = 1.5;
    double delta = 1.0;
    double M = 1.0;
    double zeta = 10.0;
    bool v1_xi_scaled = false;  // |v1| = |xi| |v0| instead of v1 = 0
};

struct ModeData {
    double xi;
    std::complex<double> v0;
    std::complex<double> v1;
};

struct MadeData {
    std::vector<ModeData> modes;
    std::vector<double> dropped_xi;  // magnitudes below the underflow guard
};

/// Builds per-mode initial pairs on the given frequency grid. Magnitudes that
/// would fall below 1e-290 are dropped from the grid and reported, never
/// flushed to zero.
MadeData make_data(const GevreyProfile& profile, std::span<const double> xi_grid);

struct ThresholdReport {
    Regime regime = Regime::Inadmissible;
    double sigma_star = 0.0;  // +inf tagged via cinf
    bool cinf = false;
    std::string formula;
};

/// Supremal admissible Gevrey index for the report's regime.
ThresholdReport threshold(const HypothesisReport& report);

struct GevreyFit {
    GevreyProfile::Kind kind = GevreyProfile::Kind::Gevrey;
    std::vector<double> xi_env, mag_env;  // per-dyad envelope points used in the fit
    double sigma_eff = 0.0;
    double delta_eff = 0.0;
    double raw_slope = 0.0;      // double-log transform slope (diagnostic)
    double raw_intercept = 0.0;
    double poly_order = 0.0;     // PolynomialDecay: order of |v| decay
    double residual = 0.0;
    bool monotone_warning = false;
    bool refined = false;  // Gauss-Newton refinement converged
};

/// Fits the terminal decay law. Gevrey case: double-log transform least
/// squares (normalization M-hat = e * max magnitude) refined by a few
/// Gauss-Newton steps on log|v| = log M' - delta' xi^(1/sigma'). Polynomial
/// case: plain log-log slope. Oscillation in xi is suppressed by fitting
/// per-dyad maxima.
GevreyFit fit_decay(std::span<const double> xi, std::span<const double> magnitudes,
                    GevreyProfile::Kind kind);

}  // namespace singlab
