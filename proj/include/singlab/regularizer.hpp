#pragma once

#include <vector>

#include "singlab/coeff_models.hpp"
#include "singlab/quadrature.hpp"

namespace singlab {

enum class Side { T0AtRight, T0AtLeft };
const char* side_name(Side s);

/// Regime-dependent smoothing recipe: the exponent z of the inner-branch
/// power matching, and the frequency link eps(|xi|) = |xi|^(-e).
struct RegularizationPlan {
    Regime regime = Regime::Thm4;
    Side side = Side::T0AtRight;
    double z = 0.0;       // used by the Thm1 construction only
    double e = 1.0;       // eps rule exponent
    double pq_sum = 1.0;
    double rs_sum = 1.0;  // effective (fallback applied)
    double r_eff = 0.0;
    double inv_s_eff = 1.0;
    double lambda0 = 0.0;

    double eps_for_xi(double xi) const { return std::pow(xi, -e); }
};

/// Builds the plan from a hypothesis report. z = max{1/s, (p+1/q)-r-1} + z_margin
/// for the Thm1 construction. Throws DegenerateExponentError when the eps-rule
/// denominator is not positive (parameters outside the theorem's scope).
RegularizationPlan make_plan(const HypothesisReport& report, double z_margin, Side side);

/// The regularized coefficient a_eps and its derivative in closed form.
/// Branch membership is half-open: the matching time t0 -/+ eps belongs to the
/// outer (non-singular-side) branch.
class RegularizedCoefficient {
  public:
    RegularizedCoefficient(const CoefficientModel& model, const RegularizationPlan& plan,
                           double eps);

    double a(double t) const;
    double da(double t) const;
    /// |a_eps - a| at t; exact zero on branches where a_eps == a
    double deviation(double t) const;

    double branch_time() const { return branch_time_; }
    double eps() const { return eps_; }
    const RegularizationPlan& plan() const { return plan_; }
    const CoefficientModel& model() const { return *model_; }
    bool inner(double t) const {
        return plan_.side == Side::T0AtRight ? t > branch_time_ : t < branch_time_;
    }

  private:
    const CoefficientModel* model_;
    RegularizationPlan plan_;
    double eps_;
    double branch_time_;
    double frozen_a_ = 0.0;  // a(t0 -/+ eps) for the Thm2/3/4 constructions
    // cached eps powers (hot path: quadrature integrands)
    double k_outer_ = 0.0;   // eps^(2-rs) or eps^(3-pq)
    double k_inner_ = 0.0;   // eps^-(z+r)
    double k_floor_ = 0.0;   // eps^-(rs) or eps^(1-pq)
};

RegularizedCoefficient build_a_eps(const CoefficientModel& model, const RegularizationPlan& plan,
                                   double eps);

struct IntegralValue {
    double value = 0.0;
    double error_bound = 0.0;
};

/// I1 = integral over (0,T) of |a_eps'| / a_eps, split at the branch boundary.
IntegralValue integral_I1(const CoefficientModel& model, const RegularizationPlan& plan,
                          double eps, double tol);
/// I2 = integral over (0,T) of |a_eps - a| / sqrt(a_eps).
IntegralValue integral_I2(const CoefficientModel& model, const RegularizationPlan& plan,
                          double eps, double tol);

/// Diagnostic decomposition of I1 for the Thm3 improved estimate: the outer
/// integral is split at distance eps^((1/2)(3-pq)) from t0.
struct Thm3Split {
    double far = 0.0;   // coefficient floor dominates
    double near = 0.0;  // regularizer dominates
    double split_distance = 0.0;
};

struct ScalingFit {
    std::vector<double> eps;
    std::vector<double> i1, i2;
    std::vector<double> i1_err, i2_err;
    double i1_slope = 0.0, i1_intercept = 0.0, i1_residual = 0.0;
    double i2_slope = 0.0, i2_intercept = 0.0, i2_residual = 0.0;
    double i1_slope_theory = 0.0;
    double i2_slope_theory = 0.0;
    bool i1_loglog = false;        // Thm4: fit against log|log eps|
    bool degenerate_zero = false;  // I1 identically zero (constant coefficient)
    double fitted_cprime = 0.0;    // I1 prefactor
    double fitted_csecond = 0.0;   // I2 prefactor
    double fitted_ctilde = 0.0;    // max of the two
    std::vector<Thm3Split> thm3_splits;
};

/// Theoretical slopes of log I1 and log I2 for the plan's regime.
double theory_i1_slope(const RegularizationPlan& plan, const HypothesisReport& report);
double theory_i2_slope(const RegularizationPlan& plan);

/// Measures I1, I2 over the eps grid and regresses log-log slopes against the
/// theoretical exponents. The grid must span >= 3 decades with >= 12 points
/// inside (0, T/2].
ScalingFit fit_scaling(const CoefficientModel& model, const RegularizationPlan& plan,
                       const HypothesisReport& report, const std::vector<double>& eps_grid,
                       double tol, int workers = 1);

/// Plain least squares y = slope*x + intercept; throws on degenerate x.
struct LineFit {
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace singlab
