#include <doctest.h>

#include <cmath>

#include "singlab/mode_solver.hpp"

using namespace singlab;

namespace {

CoefficientModel model(Family fam, double t0, double T, double lambda0, double c, double gamma,
                       double m, double p = 0.0, double q = 1.0) {
    Exponents e;
    e.p = p;
    e.q = q;
    return CoefficientModel::make(fam, t0, T, lambda0, c, gamma, m, 0.3, 1, e);
}

HypothesisReport report_for(Regime regime, double pq, double rs, double lambda0) {
    HypothesisReport rep;
    rep.h2_ok = true;
    rep.suppl_ok = true;
    rep.pq_sum = pq;
    rep.rs_sum = rs;
    rep.lambda0 = lambda0;
    rep.regime = regime;
    rep.declared.p = pq;
    rep.declared.q = kInf;
    return rep;
}

}  // namespace

TEST_CASE("constant coefficient reproduces cos(xi t)") {
    const auto mdl = model(Family::Constant, 2.0, 2.0, 0.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-10;
    opt.delta_cut = 1e-8;
    const auto traj = solve_mode(mdl, 1.0, 1.0, 0.0, opt);
    for (const auto& s : traj.samples) {
        CHECK(std::abs(s.v_re - std::cos(s.t)) <= 1e-7);
        CHECK(std::abs(s.w_re + std::sin(s.t)) <= 1e-7);
    }
    CHECK(traj.steps > 0);
}

TEST_CASE("Euler equidimensional oracle: v = (T-t)^(1/3)") {
    // a(t) = (2/9)(T-t)^(-2), xi = 1: m(m-1) = -2/9 has the root m = 1/3
    const auto mdl = model(Family::PowerBlowup, 1.0, 1.0, 0.0, 2.0 / 9.0, 2.0, 0, 3.2, kInf);
    SolveOptions opt;
    opt.tol = 1e-8;
    opt.delta_cut = 1e-8;
    const auto traj = solve_mode(mdl, 1.0, 1.0, -1.0 / 3.0, opt);
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        const double exact = std::cbrt(1.0 - s.t);
        worst = std::max(worst, std::abs(s.v_re - exact) / exact);
    }
    CHECK(worst <= 10.0 * opt.tol);
}

TEST_CASE("oscillatory coefficient: self-convergence under tol refinement") {
    const auto mdl = model(Family::OscillatorySingular, 1.0, 1.0, 0.0, 1.0, 0, 0.8, 1.8, kInf);
    SolveOptions coarse;
    coarse.tol = 1e-7;
    coarse.delta_cut = 1e-6;
    SolveOptions fine = coarse;
    fine.tol = 1e-9;
    const auto a = solve_mode(mdl, 64.0, 1.0, 0.0, coarse);
    const auto b = solve_mode(mdl, 64.0, 1.0, 0.0, fine);
    const double scale = std::abs(b.back().v_re) + std::abs(b.back().w_re) / 64.0;
    CHECK(std::abs(a.back().v_re - b.back().v_re) <= 2e3 * coarse.tol * scale);
    CHECK(std::abs(a.back().w_re - b.back().w_re) / 64.0 <= 2e3 * coarse.tol * scale);
}

TEST_CASE("Wronskian of the canonical pair stays 1") {
    const auto mdl = model(Family::OscillatorySingular, 1.0, 1.0, 0.5, 1.0, 0, 0.5, 1.5, kInf);
    SolveOptions opt;
    opt.tol = 1e-9;
    opt.delta_cut = 1e-7;
    const auto t1 = solve_mode(mdl, 8.0, 1.0, 0.0, opt);
    const auto t2 = solve_mode(mdl, 8.0, 0.0, 1.0, opt);
    REQUIRE(t1.samples.size() == t2.samples.size());
    for (std::size_t i = 0; i < t1.samples.size(); ++i) {
        REQUIRE(t1.samples[i].t == t2.samples[i].t);
        const double w = t1.samples[i].v_re * t2.samples[i].w_re -
                         t2.samples[i].v_re * t1.samples[i].w_re;
        CHECK(std::abs(w - 1.0) <= 1e-6);
    }
}

TEST_CASE("energy conservation for a == const") {
    const auto mdl = model(Family::Constant, 1.0, 1.0, 0.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-10;
    opt.delta_cut = 1e-8;
    for (double xi : {1.0, 16.0}) {
        const auto traj = solve_mode(mdl, xi, 1.0, 0.0, opt);
        const double E0 = xi * xi;  // a=1, v=1, w=0
        for (const auto& s : traj.samples) {
            const double E = xi * xi * (s.v_re * s.v_re) + s.w_re * s.w_re;
            CHECK(std::abs(E - E0) / E0 <= 100.0 * opt.tol);
        }
    }
}

TEST_CASE("time reversal recovers the initial data") {
    const auto mdl = model(Family::PowerBlowup, 1.0, 1.0, 0.5, 1.0, 0.5, 0, 2.0, kInf);
    SolveOptions opt;
    opt.tol = 1e-9;
    opt.delta_cut = 1e-6;
    const auto fwd = solve_mode(mdl, 4.0, 1.0, 0.0, opt);
    SolveOptions back = opt;
    back.backward = true;
    const auto rev = solve_mode(mdl, 4.0, fwd.back().v(), fwd.back().w(), back);
    CHECK(rev.back().t == doctest::Approx(0.0));
    CHECK(std::abs(rev.back().v_re - 1.0) <= 100.0 * opt.tol);
    CHECK(std::abs(rev.back().w_re - 0.0) <= 100.0 * opt.tol * 4.0);
}

TEST_CASE("interior t0: split-and-glue stays close to the unsplit solution") {
    const auto mdl = model(Family::Constant, 0.5, 1.0, 0.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-9;
    opt.delta_cut = 1e-6;
    const auto traj = solve_mode(mdl, 3.0, 1.0, 0.0, opt);
    // exact solution cos(3 t); the frozen 2*delta_cut gap perturbs at O(delta_cut)
    CHECK(std::abs(traj.back().v_re - std::cos(3.0)) <= 1e-4);
    double prev_t = -1.0;
    for (const auto& s : traj.samples) {
        CHECK(s.t > prev_t - 1e-15);
        prev_t = s.t;
    }
}

TEST_CASE("preconditions") {
    const auto mdl = model(Family::Constant, 1.0, 1.0, 0.0, 1.0, 0, 0);
    SolveOptions opt;
    CHECK_THROWS_AS(solve_mode(mdl, 0.5, 1.0, 0.0, opt), ConfigError);
    opt.delta_cut = 1e-15;
    CHECK_THROWS_AS(solve_mode(mdl, 2.0, 1.0, 0.0, opt), ConfigError);
}

TEST_CASE("certificate: conserved case has margin 1 and zero integrals") {
    const auto mdl = model(Family::Constant, 1.0, 1.0, 1.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-10;
    opt.delta_cut = 1e-8;
    const auto traj = solve_mode(mdl, 16.0, 1.0, 0.0, opt);
    const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
    const auto cert = energy_certificate(traj, mdl, plan, plan.eps_for_xi(16.0), 1e-8);
    CHECK(cert.I1 == 0.0);
    CHECK(cert.I2 == 0.0);
    CHECK(cert.margin == doctest::Approx(1.0).epsilon(1e-7));
    CHECK_FALSE(cert.degenerate);
}

TEST_CASE("certificate: zero data flagged degenerate") {
    const auto mdl = model(Family::Constant, 1.0, 1.0, 1.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-9;
    opt.delta_cut = 1e-8;
    const auto traj = solve_mode(mdl, 4.0, 0.0, 0.0, opt);
    const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
    const auto cert = energy_certificate(traj, mdl, plan, 0.25, 1e-8);
    CHECK(cert.degenerate);
    CHECK(cert.margin == 1.0);
}

TEST_CASE("certificate: a corrupted trajectory is rejected") {
    const auto mdl = model(Family::Constant, 1.0, 1.0, 1.0, 1.0, 0, 0);
    SolveOptions opt;
    opt.tol = 1e-9;
    opt.delta_cut = 1e-8;
    auto traj = solve_mode(mdl, 8.0, 1.0, 0.0, opt);
    for (std::size_t i = traj.samples.size() / 2; i < traj.samples.size(); ++i) {
        traj.samples[i].v_re *= 3.0;
        traj.samples[i].w_re *= 3.0;
    }
    const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
    CHECK_THROWS_AS(energy_certificate(traj, mdl, plan, 0.125, 1e-8), CertificateViolation);
}

TEST_CASE("gronwall certificate holds for a genuinely singular oscillatory mode") {
    const auto mdl = model(Family::OscillatorySingular, 1.0, 1.0, 0.0, 1.0, 0, 0.8, 3.0, kInf);
    SolveOptions opt;
    opt.tol = 1e-8;
    opt.delta_cut = 1e-6;
    const double xi = 32.0;
    HypothesisReport rep = report_for(Regime::Thm1, 3.0, 1.0, 0.0);
    const auto plan = make_plan(rep, 0.5, Side::T0AtRight);
    const auto traj = solve_mode(mdl, xi, 1.0, 0.0, opt);
    const auto cert = energy_certificate(traj, mdl, plan, plan.eps_for_xi(xi), 1e-6);
    CHECK(cert.margin <= 1.0 + cert.slack);
    CHECK(cert.I1 > 0.0);
    CHECK(cert.I2 > 0.0);
}

TEST_CASE("terminal bound: Thm1 weight exponent matches the closed-form display") {
    const auto mdl = model(Family::OscillatorySingular, 1.0, 1.0, 0.0, 1.0, 0, 0.8, 3.0, kInf);
    SolveOptions opt;
    opt.tol = 1e-8;
    opt.delta_cut = 1e-6;
    HypothesisReport rep = report_for(Regime::Thm1, 3.0, 1.0, 0.0);
    const auto plan = make_plan(rep, 0.5, Side::T0AtRight);
    const double xi = 16.0;
    const auto traj = solve_mode(mdl, xi, 1.0, 0.0, opt);
    const auto cert = energy_certificate(traj, mdl, plan, plan.eps_for_xi(xi), 1e-6);
    std::vector<double> grid;
    for (int i = 0; i < 12; ++i) grid.push_back(1e-4 * std::pow(10.0, 3.0 * i / 11.0));
    const auto fit = fit_scaling(mdl, plan, rep, grid, 1e-4, 2);
    const auto tb = terminal_bound_check(traj, mdl, plan, fit, cert);
    CHECK(tb.weight_exponent == doctest::Approx(tb.weight_exponent_display).epsilon(1e-12));
    CHECK(tb.weight_exponent == doctest::Approx(2.0 - (2.0 - 1.0) * (2.0 / 3.0)));
    CHECK(tb.ok);
}
