#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "singlab/errors.hpp"

namespace singlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Family { Constant, PowerBlowup, OscillatorySingular, LogGrowth };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

/// Declared integrability exponents. q and s may be infinite; 1/q and 1/s
/// evaluate to 0 in that case.
struct Exponents {
    double p = 0.0;
    double q = kInf;
    double r = 0.0;
    double s = 1.0;

    double inv_q() const { return std::isinf(q) ? 0.0 : 1.0 / q; }
    double inv_s() const { return std::isinf(s) ? 0.0 : 1.0 / s; }
    double pq_sum() const { return p + inv_q(); }
    double rs_sum() const { return r + inv_s(); }
    /// conjugate exponent q' = q/(q-1); 1/q' = 1 - 1/q
    double inv_q_conj() const { return 1.0 - inv_q(); }
};

/// Parametric singular coefficient a(t) on [0,T], direction-reduced, with a
/// single singular time t0 and hyperbolicity floor lambda0. All families are
/// functions of d(t) = |t0 - t| only.
struct CoefficientModel {
    Family family = Family::Constant;
    double t0 = 1.0;
    double T = 1.0;
    double lambda0 = 0.0;
    double c = 1.0;      // amplitude
    double gamma = 0.0;  // PowerBlowup exponent
    double m = 0.0;      // OscillatorySingular phase exponent
    double phi = 0.0;    // OscillatorySingular phase offset
    double theta = 1.0;  // LogGrowth exponent, in (0,1]
    Exponents decl;

    double dist(double t) const { return std::abs(t0 - t); }
    double guard_width() const { return 1e-14 * T; }
    bool t0_at_right() const { return t0 == T; }
    bool t0_at_left() const { return t0 == 0.0; }
    bool t0_interior() const { return t0 > 0.0 && t0 < T; }
    /// true when the derivative is identically zero (constant coefficient)
    bool flat() const {
        return family == Family::Constant ||
               (family == Family::PowerBlowup && gamma == 0.0) ||
               (family == Family::OscillatorySingular && m == 0.0);
    }

    /// validates all parameter ranges; throws ConfigError
    static CoefficientModel make(Family family, double t0, double T, double lambda0, double c,
                                 double gamma, double m, double phi, double theta,
                                 const Exponents& decl);
};

double eval_a(const CoefficientModel& model, double t);
double eval_da(const CoefficientModel& model, double t);
std::pair<double, double> beta_alpha(const CoefficientModel& model, double t);

enum class Regime { Thm1, Thm2, Thm3, Thm4, Inadmissible };
const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct HypothesisReport {
    bool h1_ok = true;
    bool h2_ok = false;
    bool suppl_ok = false;
    bool l1_ok = true;  // a itself integrable on (0,T)
    double beta_lq_norm = kInf;
    double alpha_ls_norm = kInf;
    double pq_sum = 0.0;  // effective (canonical (0,1) when beta == 0)
    double rs_sum = 1.0;  // effective (fallback (0,1) when suppl fails)
    double lambda0 = 0.0;
    Exponents declared;
    bool canonical_exponents = false;
    Regime regime = Regime::Inadmissible;

    double inv_q_conj() const { return declared.inv_q_conj(); }
};

/// Closed-form (H2) admissibility of the family at exponents (p, q).
bool h2_predicate(const CoefficientModel& model, double p, double q);
/// Closed-form admissibility of |t0-t|^r a(t) in L^s(0,T).
bool suppl_predicate(const CoefficientModel& model, double r, double s);
/// Closed-form integrability of a itself on (0,T).
bool l1_predicate(const CoefficientModel& model);

/// Computes the hypothesis norms by singular quadrature, cross-checks them
/// against the closed-form predicates (the predicate is authoritative), and
/// assigns the theorem regime. Throws InconsistencyError on disagreement.
HypothesisReport classify(const CoefficientModel& model, double tol);

/// Regime table given the floor and the effective exponent sums.
Regime assign_regime(double lambda0, double pq_sum, bool h2_ok);

}  // namespace singlab
