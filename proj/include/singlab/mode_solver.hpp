#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "singlab/coeff_models.hpp"
#include "singlab/regularizer.hpp"

namespace singlab {

struct TrajectorySample {
    double t;
    double v_re, v_im;
    double w_re, w_im;  // w = v'

    std::complex<double> v() const { return {v_re, v_im}; }
    std::complex<double> w() const { return {w_re, w_im}; }
    double abs_v() const { return std::hypot(v_re, v_im); }
    double abs_w() const { return std::hypot(w_re, w_im); }
};

/// One Fourier mode of the wave equation: v'' + a(t) xi^2 v = 0, integrated
/// adaptively on [0,T] with a cut of width delta_cut around the singular time.
struct ModeTrajectory {
    double xi = 1.0;
    double delta_cut = 0.0;
    double tol = 0.0;
    std::int64_t steps = 0;
    std::int64_t rejected = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<TrajectorySample> samples;  // uniform grid plus internal steps near t0

    const TrajectorySample& front() const { return samples.front(); }
    const TrajectorySample& back() const { return samples.back(); }
};

struct SolveOptions {
    double tol = 1e-8;
    double delta_cut = 1e-8;  // absolute, in time units
    int n_samples = 256;
    bool backward = false;  // integrate from t_end to t_begin (reversibility checks)
};

/// Integrates the mode ODE. For t0 = T the interval is [0, T - delta_cut];
/// for t0 = 0 the data are posed at t = delta_cut; an interior t0 splits the
/// interval and transports (v, v') across [t0-delta_cut, t0+delta_cut] by
/// freezing. Throws SolverError on step underflow or non-finite state.
ModeTrajectory solve_mode(const CoefficientModel& model, double xi, std::complex<double> v0,
                          std::complex<double> v1, const SolveOptions& opt);

struct EnergyCertificate {
    double xi = 0.0;
    double eps = 0.0;
    double E0 = 0.0;
    double Emax = 0.0;
    double I1 = 0.0, I2 = 0.0;
    double i1_err = 0.0, i2_err = 0.0;
    double gronwall_rhs = 0.0;
    double margin = 0.0;  // max_t E(t) / gronwall_rhs
    double slack = 0.0;
    double worst_t = 0.0;
    bool degenerate = false;  // zero initial data
    std::vector<double> energy_trace;
    std::vector<double> trace_times;
};

/// Evaluates the approximate energy along the trajectory and certifies the
/// Gronwall bound E(t) <= E(0) exp(I1 + xi I2) within slack. A violation
/// beyond slack throws CertificateViolation.
EnergyCertificate energy_certificate(const ModeTrajectory& traj, const CoefficientModel& model,
                                     const RegularizationPlan& plan, double eps, double tol);

/// Reconstruction of the final per-theorem a-priori inequality with the fitted
/// constant from a ScalingFit, evaluated on the measured terminal state.
struct TerminalBoundReport {
    Regime regime = Regime::Inadmissible;
    double xi = 0.0;
    double eps = 0.0;
    double ctilde = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool ok = false;
    bool applies = true;          // Thm4 needs xi >= e
    double weight_exponent = 0.0;  // Thm1 lower-bound |xi| power on |v|^2
    double weight_exponent_display = 0.0;  // same, from the closed-form display
};

TerminalBoundReport terminal_bound_check(const ModeTrajectory& traj, const CoefficientModel& model,
                                         const RegularizationPlan& plan, const ScalingFit& fit,
                                         const EnergyCertificate& cert);

}  // namespace singlab
