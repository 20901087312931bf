#include "singlab/mode_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace singlab {

namespace {

using State = std::array<double, 4>;  // (Re v, Im v, Re w, Im w)

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct Integrator {
    const CoefficientModel& model;
    double xi2;
    double tol;
    std::int64_t steps = 0;
    std::int64_t rejected = 0;

    void rhs(double t, const State& y, State& f) const {
        const double a = eval_a(model, t) * xi2;
        f[0] = y[2];
        f[1] = y[3];
        f[2] = -a * y[0];
        f[3] = -a * y[1];
    }

    // advances from t to t+h; returns the error ratio (accept iff <= 1)
    double step(double t, double h, const State& y, const State& k1, State& ynew, State& k7,
                double* err_ratio) {
        State k2, k3, k4, k5, k6, tmp;
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, tmp, k2);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, tmp, k3);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, tmp, k4);
        for (int i = 0; i < 4; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, tmp, k5);
        for (int i = 0; i < 4; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, tmp, k6);
        for (int i = 0; i < 4; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        double ratio = 0.0;
        const double ah = std::abs(h);
        for (int i = 0; i < 4; ++i) {
            const double err = std::abs(h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                             e6 * k6[i] + e7 * k7[i]));
            // error-per-unit-step with a component scale that survives zero
            // crossings of v
            const double scale = std::abs(y[i]) + ah * std::abs(k1[i]) + 1e-300;
            ratio = std::max(ratio, err / (tol * ah * scale));
        }
        *err_ratio = ratio;
        return ratio;
    }
};

// integrates over [ta, tb] (either direction), appending samples at the
// requested times plus internal accepted steps within `near_window` of t_near
void integrate_span(Integrator& integ, State& y, double ta, double tb,
                    const std::vector<double>& sample_times, double t_near, double near_window,
                    std::vector<TrajectorySample>& out) {
    const double dir = (tb >= ta) ? 1.0 : -1.0;
    const double span = std::abs(tb - ta);
    if (span == 0.0) return;

    auto record = [&](double t, const State& s) {
        out.push_back({t, s[0], s[1], s[2], s[3]});
    };

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() &&
           (dir > 0 ? sample_times[next_sample] <= ta : sample_times[next_sample] >= ta)) {
        if (sample_times[next_sample] == ta) record(ta, y);
        ++next_sample;
    }

    double t = ta;
    double h = dir * span * 1e-4;
    State k1;
    integ.rhs(t, y, k1);
    int underflow_streak = 0;

    while (dir * (tb - t) > 0.0) {
        if (dir * (t + h) > dir * tb) h = tb - t;
        bool clipped_to_sample = false;
        if (next_sample < sample_times.size() &&
            dir * (t + h) >= dir * sample_times[next_sample]) {
            h = sample_times[next_sample] - t;
            clipped_to_sample = true;
        }
        if (std::abs(h) < 1e-16 * span) {
            ++underflow_streak;
            if (underflow_streak > 64) {
                throw SolverError("step size underflow at t=" + std::to_string(t) +
                                  " (delta_cut too small for this coefficient)");
            }
            // advance through a degenerate sliver (e.g. coincident sample time)
            if (clipped_to_sample) {
                record(sample_times[next_sample], y);
                ++next_sample;
                h = dir * span * 1e-6;
                continue;
            }
        }

        State ynew, k7;
        double ratio;
        integ.step(t, h, y, k1, ynew, k7, &ratio);
        if (!std::isfinite(ratio) || !std::isfinite(ynew[0]) || !std::isfinite(ynew[2])) {
            throw SolverError("non-finite state at t=" + std::to_string(t));
        }
        if (ratio <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            ++integ.steps;
            underflow_streak = 0;
            if (clipped_to_sample && next_sample < sample_times.size() &&
                t == sample_times[next_sample]) {
                record(t, y);
                ++next_sample;
            } else if (std::abs(t - t_near) <= near_window) {
                record(t, y);
            }
        } else {
            ++integ.rejected;
        }
        const double grow = 0.9 * std::pow(std::max(ratio, 1e-12), -0.2);
        h *= std::clamp(grow, 0.2, 5.0);
        if (std::abs(h) > 0.1 * span) h = dir * 0.1 * span;
    }
}

}  // namespace

ModeTrajectory solve_mode(const CoefficientModel& model, double xi, std::complex<double> v0,
                          std::complex<double> v1, const SolveOptions& opt) {
    if (!(xi >= 1.0)) throw ConfigError("xi must be >= 1");
    if (!(opt.tol > 0.0)) throw ConfigError("solver tol must be positive");
    if (!(opt.delta_cut >= 1e-12 * model.T)) {
        throw ConfigError("delta_cut must be >= 1e-12 * T");
    }
    const int n_samples = std::max(opt.n_samples, 200);

    ModeTrajectory traj;
    traj.xi = xi;
    traj.delta_cut = opt.delta_cut;
    traj.tol = opt.tol;

    Integrator integ{model, xi * xi, opt.tol};
    State y{v0.real(), v0.imag(), v1.real(), v1.imag()};

    const double near_window = std::max(1e-3 * model.T, 100.0 * opt.delta_cut);

    auto uniform = [&](double a, double b) {
        std::vector<double> ts(static_cast<std::size_t>(n_samples));
        for (int i = 0; i < n_samples; ++i) {
            ts[static_cast<std::size_t>(i)] = a + (b - a) * double(i) / double(n_samples - 1);
        }
        return ts;
    };

    if (model.t0_at_right()) {
        traj.t_begin = 0.0;
        traj.t_end = model.T - opt.delta_cut;
    } else if (model.t0_at_left()) {
        traj.t_begin = opt.delta_cut;
        traj.t_end = model.T;
    } else {
        traj.t_begin = 0.0;
        traj.t_end = model.T;
    }
    if (opt.backward) std::swap(traj.t_begin, traj.t_end);

    if (!model.t0_interior()) {
        auto ts = uniform(traj.t_begin, traj.t_end);
        integrate_span(integ, y, traj.t_begin, traj.t_end, ts, model.t0, near_window,
                       traj.samples);
    } else {
        if (opt.backward) throw ConfigError("backward integration across an interior t0 is not supported");
        // split at t0 and glue: freeze (v, v') across [t0-delta_cut, t0+delta_cut]
        const double tl = model.t0 - opt.delta_cut;
        const double tr = model.t0 + opt.delta_cut;
        auto ts = uniform(0.0, model.T);
        std::vector<double> left_ts, right_ts;
        for (double t : ts) (t <= tl ? left_ts : right_ts).push_back(std::clamp(t, 0.0, model.T));
        std::erase_if(right_ts, [&](double t) { return t < tr; });
        integrate_span(integ, y, 0.0, tl, left_ts, model.t0, near_window, traj.samples);
        traj.samples.push_back({tr, y[0], y[1], y[2], y[3]});  // transported state
        integrate_span(integ, y, tr, model.T, right_ts, model.t0, near_window, traj.samples);
    }

    if (traj.samples.empty() || traj.samples.back().t != traj.t_end) {
        traj.samples.push_back({traj.t_end, y[0], y[1], y[2], y[3]});
    }
    if (!opt.backward) {
        std::stable_sort(traj.samples.begin(), traj.samples.end(),
                         [](const TrajectorySample& a, const TrajectorySample& b) { return a.t < b.t; });
    }
    traj.steps = integ.steps;
    traj.rejected = integ.rejected;
    return traj;
}

EnergyCertificate energy_certificate(const ModeTrajectory& traj, const CoefficientModel& model,
                                     const RegularizationPlan& plan, double eps, double tol) {
    const RegularizedCoefficient reg = build_a_eps(model, plan, eps);
    EnergyCertificate cert;
    cert.xi = traj.xi;
    cert.eps = eps;

    const double xi2 = traj.xi * traj.xi;
    cert.trace_times.reserve(traj.samples.size());
    cert.energy_trace.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        const double E = reg.a(s.t) * xi2 * (s.v_re * s.v_re + s.v_im * s.v_im) +
                         (s.w_re * s.w_re + s.w_im * s.w_im);
        cert.trace_times.push_back(s.t);
        cert.energy_trace.push_back(E);
    }
    cert.E0 = cert.energy_trace.front();
    cert.Emax = *std::max_element(cert.energy_trace.begin(), cert.energy_trace.end());

    if (cert.E0 == 0.0) {
        cert.degenerate = true;
        cert.margin = 1.0;
        cert.gronwall_rhs = 0.0;
        return cert;
    }

    const IntegralValue i1 = integral_I1(model, plan, eps, tol);
    const IntegralValue i2 = integral_I2(model, plan, eps, tol);
    cert.I1 = i1.value;
    cert.I2 = i2.value;
    cert.i1_err = i1.error_bound;
    cert.i2_err = i2.error_bound;
    cert.gronwall_rhs = cert.E0 * std::exp(cert.I1 + traj.xi * cert.I2);

    cert.margin = 0.0;
    for (std::size_t i = 0; i < cert.energy_trace.size(); ++i) {
        const double r = cert.energy_trace[i] / cert.gronwall_rhs;
        if (r > cert.margin) {
            cert.margin = r;
            cert.worst_t = cert.trace_times[i];
        }
    }
    cert.slack = 100.0 * std::max(tol, traj.tol) + cert.i1_err + traj.xi * cert.i2_err;
    if (cert.margin > 1.0 + cert.slack) {
        throw CertificateViolation(
            "Gronwall certificate violated: margin " + std::to_string(cert.margin) + " at t=" +
                std::to_string(cert.worst_t) + " (xi=" + std::to_string(traj.xi) + ")",
            cert.worst_t, cert.margin);
    }
    return cert;
}

TerminalBoundReport terminal_bound_check(const ModeTrajectory& traj, const CoefficientModel& model,
                                         const RegularizationPlan& plan, const ScalingFit& fit,
                                         const EnergyCertificate& cert) {
    TerminalBoundReport rep;
    rep.regime = plan.regime;
    rep.xi = traj.xi;
    rep.eps = plan.eps_for_xi(traj.xi);
    rep.ctilde = fit.fitted_ctilde;

    const TrajectorySample& end = traj.back();
    const TrajectorySample& start = traj.front();
    const double xi = traj.xi;
    const double xi2 = xi * xi;
    const double eps = rep.eps;
    const double L = std::abs(std::log(eps));
    const double slack = 0.05 + cert.slack;

    switch (plan.regime) {
        case Regime::Thm1: {
            const double rs = plan.rs_sum;
            const double pq = plan.pq_sum;
            rep.weight_exponent = 2.0 - (2.0 - rs) * plan.e;
            rep.weight_exponent_display = 2.0 - (2.0 - rs) / (pq - 1.5 * rs);
            const double lhs_w = std::pow(model.T, -2.0) * std::pow(xi, rep.weight_exponent) *
                                     (end.abs_v() * end.abs_v()) +
                                 end.abs_w() * end.abs_w();
            double K;
            if (plan.side == Side::T0AtRight) {
                K = eval_a(model, 0.0) + std::pow(model.T, -rs);
            } else {
                K = (eval_a(model, model.T) + std::pow(model.T, -rs)) * std::pow(eps, -rs);
            }
            const double grow = std::exp(rep.ctilde * (1.0 + L) *
                                         (std::pow(eps, fit.i1_slope_theory) +
                                          xi * std::pow(eps, fit.i2_slope_theory)));
            rep.lhs = lhs_w;
            rep.rhs = (K * xi2 * start.abs_v() * start.abs_v() + start.abs_w() * start.abs_w()) * grow;
            break;
        }
        case Regime::Thm2:
        case Regime::Thm3: {
            const double grow = std::exp(rep.ctilde * (1.0 + L) *
                                         (std::pow(eps, fit.i1_slope_theory) +
                                          xi * std::pow(eps, fit.i2_slope_theory)));
            rep.lhs = cert.Emax;
            rep.rhs = cert.E0 * grow;
            break;
        }
        case Regime::Thm4: {
            rep.applies = xi >= std::exp(1.0);
            const double a0 = plan.side == Side::T0AtRight ? eval_a(model, 0.0)
                                                           : eval_a(model, model.T);
            rep.lhs = xi2 * end.abs_v() * end.abs_v() + end.abs_w() * end.abs_w();
            rep.rhs = (a0 * xi2 * start.abs_v() * start.abs_v() + start.abs_w() * start.abs_w()) *
                      std::pow(xi, fit.fitted_cprime);
            break;
        }
        case Regime::Inadmissible:
            rep.applies = false;
            break;
    }
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : kInf;
    rep.ok = !rep.applies || rep.ratio <= 1.0 + slack;
    return rep;
}

}  // namespace singlab
