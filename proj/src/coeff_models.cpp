#include "singlab/coeff_models.hpp"

#include <cmath>

#include "singlab/quadrature.hpp"

namespace singlab {

const char* family_name(Family f) {
    switch (f) {
        case Family::Constant: return "constant";
        case Family::PowerBlowup: return "power_blowup";
        case Family::OscillatorySingular: return "oscillatory";
        case Family::LogGrowth: return "log_growth";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "constant") return Family::Constant;
    if (name == "power_blowup") return Family::PowerBlowup;
    if (name == "oscillatory") return Family::OscillatorySingular;
    if (name == "log_growth") return Family::LogGrowth;
    throw ConfigError("unknown coefficient family '" + name + "'");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Thm1: return "Thm1";
        case Regime::Thm2: return "Thm2";
        case Regime::Thm3: return "Thm3";
        case Regime::Thm4: return "Thm4";
        case Regime::Inadmissible: return "Inadmissible";
    }
    return "?";
}

Regime regime_from_name(const std::string& name) {
    if (name == "Thm1" || name == "thm1") return Regime::Thm1;
    if (name == "Thm2" || name == "thm2") return Regime::Thm2;
    if (name == "Thm3" || name == "thm3") return Regime::Thm3;
    if (name == "Thm4" || name == "thm4") return Regime::Thm4;
    throw ConfigError("unknown regime '" + name + "'");
}

CoefficientModel CoefficientModel::make(Family family, double t0, double T, double lambda0,
                                        double c, double gamma, double m, double phi,
                                        double theta, const Exponents& decl) {
    if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
    if (!(t0 >= 0.0 && t0 <= T)) throw ConfigError("t0 must lie in [0,T]");
    if (!(lambda0 >= 0.0)) throw ConfigError("lambda0 must be >= 0");
    if (!(c > 0.0)) throw ConfigError("amplitude c must be positive");
    if (!(gamma >= 0.0)) throw ConfigError("blow-up exponent gamma must be >= 0");
    if (!(m >= 0.0)) throw ConfigError("oscillation exponent m must be >= 0");
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("log exponent theta must be in (0,1]");
    if (!(decl.p >= 0.0)) throw ConfigError("exponent p must be >= 0");
    if (!(decl.q >= 1.0)) throw ConfigError("exponent q must be in [1,inf]");
    if (!(decl.r >= 0.0)) throw ConfigError("exponent r must be >= 0");
    if (!(decl.s >= 1.0)) throw ConfigError("exponent s must be in [1,inf]");
    if (family == Family::LogGrowth) {
        const double dmax = std::max(t0, T - t0);
        // |log d| needs d <= 1; theta < 1 additionally needs d < 1 so that
        // |log d|^(theta-1) stays bounded at the far endpoint
        if (theta == 1.0 ? dmax > 1.0 : dmax >= 1.0) {
            throw ConfigError("log_growth requires max(t0, T-t0) <= 1 (strictly, unless theta = 1)");
        }
    }
    CoefficientModel mdl;
    mdl.family = family;
    mdl.t0 = t0;
    mdl.T = T;
    mdl.lambda0 = lambda0;
    mdl.c = c;
    mdl.gamma = gamma;
    mdl.m = m;
    mdl.phi = phi;
    mdl.theta = theta;
    mdl.decl = decl;
    return mdl;
}

namespace {

void check_domain(const CoefficientModel& model, double t) {
    if (!(t >= 0.0 && t <= model.T)) {
        throw EvalDomainError("coefficient evaluated outside [0,T]: t=" + std::to_string(t));
    }
    if (model.dist(t) < model.guard_width()) {
        throw EvalDomainError("coefficient evaluated inside the singular-point guard at t=" +
                              std::to_string(t));
    }
}

}  // namespace

double eval_a(const CoefficientModel& model, double t) {
    check_domain(model, t);
    const double d = model.dist(t);
    switch (model.family) {
        case Family::Constant:
            return model.lambda0 + model.c;
        case Family::PowerBlowup:
            return model.lambda0 + model.c * detail::pow_fast(d, -model.gamma);
        case Family::OscillatorySingular:
            return model.lambda0 +
                   model.c * (1.0 + 0.5 * std::sin(detail::pow_fast(d, -model.m) + model.phi));
        case Family::LogGrowth:
            return model.lambda0 + model.c * (1.0 + std::pow(std::abs(std::log(d)), model.theta));
    }
    return 0.0;
}

double eval_da(const CoefficientModel& model, double t) {
    check_domain(model, t);
    const double d = model.dist(t);
    const double sgn = (t > model.t0) ? 1.0 : -1.0;  // d'(t)
    switch (model.family) {
        case Family::Constant:
            return 0.0;
        case Family::PowerBlowup:
            return -model.gamma * model.c * detail::pow_fast(d, -model.gamma - 1.0) * sgn;
        case Family::OscillatorySingular: {
            if (model.m == 0.0) return 0.0;
            const double psi = detail::pow_fast(d, -model.m) + model.phi;
            return -0.5 * model.c * model.m * detail::pow_fast(d, -model.m - 1.0) * std::cos(psi) *
                   sgn;
        }
        case Family::LogGrowth: {
            // domain keeps d <= 1, so |log d| = -log d
            const double L = -std::log(d);
            if (L == 0.0) return -model.c * model.theta * sgn / d;  // theta == 1 at d == 1
            return -model.c * model.theta * std::pow(L, model.theta - 1.0) * sgn / d;
        }
    }
    return 0.0;
}

std::pair<double, double> beta_alpha(const CoefficientModel& model, double t) {
    const double d = model.dist(t);
    const double beta = std::pow(d, model.decl.p) * eval_da(model, t);
    const double alpha = std::pow(d, model.decl.r) * eval_a(model, t);
    return {beta, alpha};
}

bool h2_predicate(const CoefficientModel& model, double p, double q) {
    if (model.flat()) return true;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    switch (model.family) {
        case Family::Constant:
            return true;
        case Family::PowerBlowup:
            // |beta| ~ d^(p-gamma-1); the q = inf borderline gamma = p-1 is
            // admissible (beta is then a nonzero constant)
            if (std::isinf(q)) return model.gamma + 1.0 - p <= 0.0;
            return model.gamma + 1.0 - p < inv_q;
        case Family::OscillatorySingular:
            if (std::isinf(q)) return p >= model.m + 1.0;
            return p + inv_q > model.m + 1.0;
        case Family::LogGrowth: {
            // |beta| ~ d^(p-1) |log d|^(theta-1)
            if (std::isinf(q)) return p >= 1.0;
            if (p + inv_q > 1.0) return true;
            if (p + inv_q == 1.0) return model.theta < 1.0 - inv_q;
            return false;
        }
    }
    return false;
}

bool suppl_predicate(const CoefficientModel& model, double r, double s) {
    const double inv_s = std::isinf(s) ? 0.0 : 1.0 / s;
    switch (model.family) {
        case Family::Constant:
            return true;
        case Family::PowerBlowup:
            if (std::isinf(s)) return r >= model.gamma;
            return model.gamma - r < inv_s;
        case Family::OscillatorySingular:
            return true;  // a bounded
        case Family::LogGrowth:
            // a grows like |log d|^theta; the sup norm needs a positive power of d
            if (std::isinf(s)) return r > 0.0 || model.theta == 0.0;
            return true;
    }
    return false;
}

bool l1_predicate(const CoefficientModel& model) {
    switch (model.family) {
        case Family::Constant:
        case Family::OscillatorySingular:
        case Family::LogGrowth:
            return true;
        case Family::PowerBlowup:
            return model.gamma < 1.0;
    }
    return false;
}

Regime assign_regime(double lambda0, double pq_sum, bool h2_ok) {
    if (!h2_ok) return Regime::Inadmissible;
    if (lambda0 == 0.0) {
        return pq_sum >= 3.0 ? Regime::Thm1 : Regime::Thm2;
    }
    if (pq_sum <= 1.0) return Regime::Thm4;
    if (pq_sum < 3.0) return Regime::Thm3;
    return Regime::Inadmissible;  // strictly hyperbolic with pq_sum >= 3: no theorem applies
}

namespace {

GradedMesh norm_mesh(const CoefficientModel& model) {
    if (model.t0_at_right()) return GradedMesh::singular_right(0.0, model.T);
    if (model.t0_at_left()) return GradedMesh::singular_left(0.0, model.T);
    return GradedMesh::singular_interior(0.0, model.T, model.t0);
}

// quadrature norm with divergence mapped to +inf; the eval budget keeps
// unresolvable oscillation near the panel floor from stalling the scan
double try_norm(const CoefficientModel& model, double exponent_weight, double q, double tol,
                bool weight_is_p) {
    auto f = [&](double t) {
        const double d = model.dist(t);
        const double base = weight_is_p ? eval_da(model, t) : eval_a(model, t);
        return detail::pow_fast(d, exponent_weight) * base;
    };
    try {
        return lq_norm(f, q, norm_mesh(model), tol, /*max_evals=*/30'000'000).value;
    } catch (const QuadratureError&) {
        return kInf;
    }
}

}  // namespace

HypothesisReport classify(const CoefficientModel& model, double tol) {
    if (!(tol > 0.0)) throw ConfigError("classify tolerance must be positive");
    HypothesisReport rep;
    rep.declared = model.decl;
    rep.lambda0 = model.lambda0;
    rep.h1_ok = true;
    rep.l1_ok = l1_predicate(model);

    const bool flat = model.flat();
    rep.canonical_exponents = flat;
    // a constant-in-t coefficient satisfies (H2) with any exponents; use the
    // canonical minimal pair (p,q) = (0,1)
    const double pq_eff = flat ? 1.0 : model.decl.pq_sum();

    rep.h2_ok = h2_predicate(model, model.decl.p, model.decl.q);
    rep.beta_lq_norm = flat ? 0.0 : try_norm(model, model.decl.p, model.decl.q, tol, true);

    const bool beta_finite = rep.beta_lq_norm < 1.0 / tol;
    if (rep.h2_ok && !beta_finite) {
        throw InconsistencyError("(H2) predicate holds but the quadrature L^q norm of beta "
                                 "diverges; declared (p,q) inconsistent with the family");
    }
    if (!rep.h2_ok && beta_finite) {
        throw InconsistencyError("(H2) predicate fails but the quadrature L^q norm of beta is "
                                 "finite; predicate/quadrature mismatch");
    }

    const bool suppl_family = suppl_predicate(model, model.decl.r, model.decl.s);
    {
        const double declared_alpha = try_norm(model, model.decl.r, model.decl.s, tol, false);
        const bool alpha_finite = declared_alpha < 1.0 / tol;
        if (suppl_family && !alpha_finite) {
            throw InconsistencyError("supplementary predicate holds but the quadrature L^s norm "
                                     "of alpha diverges");
        }
        if (!suppl_family && alpha_finite) {
            throw InconsistencyError("supplementary predicate fails but the quadrature L^s norm "
                                     "of alpha is finite");
        }
        rep.suppl_ok = suppl_family && model.decl.rs_sum() <= 1.0;
        if (rep.suppl_ok) {
            rep.alpha_ls_norm = declared_alpha;
            rep.rs_sum = model.decl.rs_sum();
        } else {
            // fallback (r,s) = (0,1): the L^1 norm of a itself
            rep.alpha_ls_norm = try_norm(model, 0.0, 1.0, tol, false);
            rep.rs_sum = 1.0;
        }
    }

    rep.pq_sum = pq_eff;
    rep.regime = assign_regime(model.lambda0, rep.pq_sum, rep.h2_ok);
    return rep;
}

}  // namespace singlab
