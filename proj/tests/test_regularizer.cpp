#include <doctest.h>

#include <cmath>

#include "singlab/regularizer.hpp"

using namespace singlab;

namespace {

HypothesisReport report_for(Regime regime, double pq, double rs, double lambda0, double r = 0.0,
                            double inv_s = 1.0) {
    HypothesisReport rep;
    rep.h2_ok = true;
    rep.suppl_ok = true;
    rep.pq_sum = pq;
    rep.rs_sum = rs;
    rep.lambda0 = lambda0;
    rep.regime = regime;
    rep.declared.p = pq;
    rep.declared.q = kInf;
    rep.declared.r = r;
    rep.declared.s = inv_s == 0.0 ? kInf : 1.0 / inv_s;
    return rep;
}

CoefficientModel constant_model(double lambda0, double c, double t0, double T) {
    Exponents e;
    return CoefficientModel::make(Family::Constant, t0, T, lambda0, c, 0, 0, 0, 1, e);
}

CoefficientModel osc_model(double lambda0, double c, double m, double t0, double T) {
    Exponents e;
    e.p = m + 1.0;
    e.q = kInf;
    return CoefficientModel::make(Family::OscillatorySingular, t0, T, lambda0, c, 0, m, 0.3, 1, e);
}

}  // namespace

TEST_CASE("make_plan: eps rules per regime") {
    SUBCASE("Thm1 at pq=3, rs=1: z from condz1, e = 2/3") {
        const auto plan =
            make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0, /*r=*/0.0, /*inv_s=*/1.0), 0.5,
                      Side::T0AtRight);
        // z = max{1/s, pq - r - 1} + margin = max{1, 2} + 0.5
        CHECK(plan.z == doctest::Approx(2.5));
        CHECK(plan.e == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("Thm1 with (r,s) = (1,inf): z anchor switches to pq - r - 1 = 1") {
        const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0, 1.0, 0.0), 0.5,
                                    Side::T0AtRight);
        CHECK(plan.z == doctest::Approx(1.5));
        CHECK(plan.e == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("Thm2 at pq=2: e = 2/3") {
        const auto plan = make_plan(report_for(Regime::Thm2, 2.0, 1.0, 0.0), 0.5, Side::T0AtRight);
        CHECK(plan.e == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("Thm3 at pq=2: e = 1") {
        const auto plan = make_plan(report_for(Regime::Thm3, 2.0, 1.0, 1.0), 0.5, Side::T0AtRight);
        CHECK(plan.e == doctest::Approx(1.0));
    }
    SUBCASE("Thm4: e = 1") {
        const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
        CHECK(plan.e == doctest::Approx(1.0));
    }
    SUBCASE("degenerate denominators rejected") {
        CHECK_THROWS_AS(make_plan(report_for(Regime::Thm2, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight),
                        DegenerateExponentError);
        CHECK_THROWS_AS(make_plan(report_for(Regime::Thm1, 1.0, 1.0, 0.0), 0.5, Side::T0AtRight),
                        DegenerateExponentError);
    }
}

TEST_CASE("build_a_eps: direct substitutions") {
    SUBCASE("Thm4 frozen tail leaves a untouched on the outer branch") {
        const auto mdl = osc_model(1.0, 1.0, 0.8, 1.0, 1.0);
        const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
        const auto reg = build_a_eps(mdl, plan, 0.25);
        for (double t : {0.0, 0.3, 0.5, 0.75}) {
            CHECK(reg.a(t) == eval_a(mdl, t));
            CHECK(reg.da(t) == eval_da(mdl, t));
            CHECK(reg.deviation(t) == 0.0);
        }
        // frozen value inside
        CHECK(reg.a(0.9) == doctest::Approx(eval_a(mdl, 0.75)));
        CHECK(reg.da(0.9) == 0.0);
    }
    SUBCASE("Thm1 constant model at t=0") {
        const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
        const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
        const auto reg = build_a_eps(mdl, plan, 0.1);
        CHECK(reg.a(0.0) == doctest::Approx(1.1));
    }
    SUBCASE("Thm2 inner lift") {
        Exponents e;
        e.p = 2.0;
        e.q = kInf;
        const auto mdl =
            CoefficientModel::make(Family::PowerBlowup, 1.0, 1.0, 0.0, 1.0, 1.0, 0, 0, 1, e);
        const auto plan = make_plan(report_for(Regime::Thm2, 2.0, 1.0, 0.0), 0.5, Side::T0AtRight);
        const double eps = 0.01;
        const auto reg = build_a_eps(mdl, plan, eps);
        const double t = 1.0 - eps / 2.0;
        CHECK(reg.a(t) == doctest::Approx(eval_a(mdl, 1.0 - eps) + 100.0));
        CHECK(reg.da(t) == 0.0);
    }
    SUBCASE("branch membership is half-open: matching time belongs outside") {
        const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
        const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
        const auto reg = build_a_eps(mdl, plan, 0.25);
        CHECK_FALSE(reg.inner(0.75));
        CHECK(reg.inner(0.75 + 1e-12));
        // outer formula applies at the matching time
        CHECK(reg.a(0.75) == doctest::Approx(1.0 + 0.25 / (0.25 * 0.25)));
    }
    SUBCASE("side mismatch rejected") {
        const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);  // t0 = T
        const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 0.0), 0.5, Side::T0AtLeft);
        CHECK_THROWS_AS(build_a_eps(mdl, plan, 0.1), ConfigError);
    }
}

TEST_CASE("a_eps stays strictly positive across regimes") {
    const auto mdl = osc_model(0.0, 1.0, 0.6, 1.0, 1.0);
    for (Regime rg : {Regime::Thm1, Regime::Thm2}) {
        const auto plan = make_plan(report_for(rg, rg == Regime::Thm1 ? 3.0 : 2.0, 1.0, 0.0), 0.5,
                                    Side::T0AtRight);
        for (double eps : {0.3, 0.05, 0.004}) {
            const auto reg = build_a_eps(mdl, plan, eps);
            for (int i = 0; i <= 400; ++i) {
                const double t = double(i) / 400.0 * (1.0 - 1e-9);
                CHECK(reg.a(t) > 0.0);
            }
        }
    }
}

TEST_CASE("I1 closed form for the Thm1 constant construction") {
    // outer branch contributes exactly -log eps, inner branch log(1+eps)
    const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
    const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
    for (double eps : {0.1, 0.01, 0.001}) {
        const auto i1 = integral_I1(mdl, plan, eps, 1e-9);
        const double exact = -std::log(eps) + std::log1p(eps);
        CHECK(i1.value == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("I2 closed form (outer branch) for the Thm1 constant construction") {
    const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
    const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
    const double eps = 0.01;
    const auto reg = build_a_eps(mdl, plan, eps);
    auto f = [&](double t) { return reg.deviation(t) / std::sqrt(reg.a(t)); };
    const auto outer = integrate(f, GradedMesh::singular_right(0.0, 1.0 - eps), 1e-10);
    const double exact =
        std::sqrt(eps) * (std::asinh(1.0 / std::sqrt(eps)) - std::asinh(std::sqrt(eps)));
    CHECK(outer.value == doctest::Approx(exact).epsilon(1e-7));
}

TEST_CASE("constant model under a Thm4 plan: both integrals vanish") {
    const auto mdl = constant_model(1.0, 1.0, 1.0, 1.0);
    const auto plan = make_plan(report_for(Regime::Thm4, 1.0, 1.0, 1.0), 0.5, Side::T0AtRight);
    const auto i1 = integral_I1(mdl, plan, 0.05, 1e-8);
    const auto i2 = integral_I2(mdl, plan, 0.05, 1e-8);
    CHECK(i1.value == 0.0);
    CHECK(i2.value == 0.0);
}

TEST_CASE("I2 is increasing in eps for the Thm1 constant model") {
    const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
    const auto plan = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
    double prev = 0.0;
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double v = integral_I2(mdl, plan, eps, 1e-8).value;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("mirror constructions agree for d-symmetric models") {
    // all families depend on |t0 - t| only, so the t0 = 0 construction must
    // reproduce the t0 = T values exactly (up to quadrature error)
    SUBCASE("constant, Thm1 (aeps1 vs aeps2)") {
        const auto right = constant_model(0.0, 1.0, 1.0, 1.0);
        const auto left = constant_model(0.0, 1.0, 0.0, 1.0);
        const auto pr = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtRight);
        const auto pl = make_plan(report_for(Regime::Thm1, 3.0, 1.0, 0.0), 0.5, Side::T0AtLeft);
        for (double eps : {0.08, 0.008}) {
            const auto i1r = integral_I1(right, pr, eps, 1e-9);
            const auto i1l = integral_I1(left, pl, eps, 1e-9);
            CHECK(i1l.value == doctest::Approx(i1r.value).epsilon(1e-6));
            const auto i2r = integral_I2(right, pr, eps, 1e-9);
            const auto i2l = integral_I2(left, pl, eps, 1e-9);
            CHECK(i2l.value == doctest::Approx(i2r.value).epsilon(1e-6));
        }
    }
    SUBCASE("oscillatory, Thm2 (aeps3 vs aeps4)") {
        const auto right = osc_model(0.0, 1.0, 0.6, 1.0, 1.0);
        const auto left = osc_model(0.0, 1.0, 0.6, 0.0, 1.0);
        const auto pr = make_plan(report_for(Regime::Thm2, 1.6, 1.0, 0.0), 0.5, Side::T0AtRight);
        const auto pl = make_plan(report_for(Regime::Thm2, 1.6, 1.0, 0.0), 0.5, Side::T0AtLeft);
        const double eps = 0.02;
        CHECK(integral_I1(left, pl, eps, 1e-8).value ==
              doctest::Approx(integral_I1(right, pr, eps, 1e-8).value).epsilon(1e-5));
        CHECK(integral_I2(left, pl, eps, 1e-8).value ==
              doctest::Approx(integral_I2(right, pr, eps, 1e-8).value).epsilon(1e-5));
    }
}

TEST_CASE("strict hyperbolicity never worsens I1 (Thm3 vs Thm2, pathwise)") {
    const auto weak = osc_model(0.0, 1.0, 0.8, 1.0, 1.0);
    const auto strict = osc_model(1.0, 1.0, 0.8, 1.0, 1.0);
    const auto plan2 = make_plan(report_for(Regime::Thm2, 1.8, 1.0, 0.0), 0.5, Side::T0AtRight);
    const auto plan3 = make_plan(report_for(Regime::Thm3, 1.8, 1.0, 1.0), 0.5, Side::T0AtRight);
    for (double eps : {0.05, 0.01, 0.002}) {
        const double weak_i1 = integral_I1(weak, plan2, eps, 1e-7).value;
        const double strict_i1 = integral_I1(strict, plan3, eps, 1e-7).value;
        CHECK(strict_i1 <= weak_i1);
    }
}

TEST_CASE("fit_scaling: theory slopes, fields, and the degenerate-zero flag") {
    SUBCASE("theory slope table") {
        HypothesisReport rep = report_for(Regime::Thm1, 3.0, 1.0, 0.0);
        auto plan = make_plan(rep, 0.5, Side::T0AtRight);
        CHECK(theory_i1_slope(plan, rep) == doctest::Approx(-1.0));
        CHECK(theory_i2_slope(plan) == doctest::Approx(0.5));

        rep = report_for(Regime::Thm2, 2.0, 1.0, 0.0);
        plan = make_plan(rep, 0.5, Side::T0AtRight);
        CHECK(theory_i1_slope(plan, rep) == doctest::Approx(-1.0));
        CHECK(theory_i2_slope(plan) == doctest::Approx(0.5));

        rep = report_for(Regime::Thm3, 2.0, 1.0, 1.0);
        plan = make_plan(rep, 0.5, Side::T0AtRight);
        CHECK(theory_i1_slope(plan, rep) == doctest::Approx(-0.5));

        rep = report_for(Regime::Thm4, 1.0, 1.0, 1.0);
        rep.declared.q = 2.0;  // q' = 2
        plan = make_plan(rep, 0.5, Side::T0AtRight);
        CHECK(theory_i1_slope(plan, rep) == doctest::Approx(0.5));
    }
    SUBCASE("constant under Thm4: I1 identically zero flags the fit") {
        const auto mdl = constant_model(1.0, 1.0, 1.0, 1.0);
        const auto rep = report_for(Regime::Thm4, 1.0, 1.0, 1.0);
        const auto plan = make_plan(rep, 0.5, Side::T0AtRight);
        std::vector<double> grid;
        for (int i = 0; i < 12; ++i) grid.push_back(1e-4 * std::pow(10.0, 3.0 * i / 11.0));
        const auto fit = fit_scaling(mdl, plan, rep, grid, 1e-7);
        CHECK(fit.degenerate_zero);
        CHECK(std::isnan(fit.i1_slope));
    }
    SUBCASE("grid validation") {
        const auto mdl = constant_model(0.0, 1.0, 1.0, 1.0);
        const auto rep = report_for(Regime::Thm1, 3.0, 1.0, 0.0);
        const auto plan = make_plan(rep, 0.5, Side::T0AtRight);
        std::vector<double> narrow = {1e-2, 2e-2, 3e-2, 4e-2, 5e-2, 6e-2,
                                      7e-2, 8e-2, 9e-2, 1e-1, 1.5e-1, 2e-1};
        CHECK_THROWS_AS(fit_scaling(mdl, plan, rep, narrow, 1e-7), ConfigError);
        std::vector<double> few = {1e-4, 1e-3, 1e-2, 1e-1};
        CHECK_THROWS_AS(fit_scaling(mdl, plan, rep, few, 1e-7), ConfigError);
    }
}

TEST_CASE("Thm3 diagnostic split sums to the outer integral") {
    const auto mdl = osc_model(1.0, 1.0, 0.8, 1.0, 1.0);
    const auto rep = report_for(Regime::Thm3, 1.8, 1.0, 1.0);
    const auto plan = make_plan(rep, 0.5, Side::T0AtRight);
    std::vector<double> grid;
    for (int i = 0; i < 12; ++i) grid.push_back(1e-4 * std::pow(10.0, 3.0 * i / 11.0));
    const auto fit = fit_scaling(mdl, plan, rep, grid, 1e-6, 2);
    REQUIRE(fit.thm3_splits.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double sum = fit.thm3_splits[i].far + fit.thm3_splits[i].near;
        CHECK(sum == doctest::Approx(fit.i1[i]).epsilon(2e-3));
        CHECK(fit.thm3_splits[i].split_distance == doctest::Approx(std::pow(grid[i], 0.6)));
    }
}
