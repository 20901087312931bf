#include "singlab/gevrey.hpp"

#include <algorithm>
#include <cmath>

namespace singlab {

MadeData make_data(const GevreyProfile& profile, std::span<const double> xi_grid) {
    if (profile.kind == GevreyProfile::Kind::Gevrey) {
        if (!(profile.sigma >= 1.0)) throw ConfigError("Gevrey index sigma must be >= 1");
        if (!(profile.delta > 0.0)) throw ConfigError("decay rate delta must be positive");
    } else {
        if (!(profile.zeta > 0.0)) throw ConfigError("polynomial order zeta must be positive");
    }
    if (!(profile.M > 0.0)) throw ConfigError("amplitude M must be positive");

    MadeData out;
    double prev = 0.0;
    for (double xi : xi_grid) {
        if (!(xi >= 1.0)) throw ConfigError("xi grid must lie in [1, inf)");
        if (xi <= prev) throw ConfigError("xi grid must be strictly increasing");
        prev = xi;
        double mag;
        if (profile.kind == GevreyProfile::Kind::Gevrey) {
            mag = profile.M * std::exp(-profile.delta * std::pow(xi, 1.0 / profile.sigma));
        } else {
            mag = profile.M * std::pow(xi, -0.5 * profile.zeta);
        }
        if (mag < 1e-290) {
            out.dropped_xi.push_back(xi);
            continue;
        }
        ModeData md;
        md.xi = xi;
        md.v0 = mag;
        md.v1 = profile.v1_xi_scaled ? std::complex<double>(xi * mag) : std::complex<double>(0.0);
        out.modes.push_back(md);
    }
    return out;
}

ThresholdReport threshold(const HypothesisReport& report) {
    if (report.regime == Regime::Inadmissible) {
        throw ConfigError("no well-posedness threshold for an inadmissible model");
    }
    ThresholdReport out;
    out.regime = report.regime;
    const double pq = report.pq_sum;
    const double rs = report.rs_sum;
    switch (report.regime) {
        case Regime::Thm1: {
            out.sigma_star = (pq - 1.5 * rs) / (pq - rs - 1.0);
            out.formula = "(pq-3/2 rs)/(pq-rs-1)";
            if (!report.suppl_ok) {
                // fallback (r,s) = (0,1): must coincide with the first-sentence
                // formula (pq - 3/2)/(pq - 2)
                const double first = (pq - 1.5) / (pq - 2.0);
                if (std::abs(first - out.sigma_star) > 1e-12 * std::abs(first)) {
                    throw InconsistencyError("Thm1 fallback threshold mismatch");
                }
            }
            break;
        }
        case Regime::Thm2:
            out.sigma_star = 1.5;
            out.formula = "3/2";
            break;
        case Regime::Thm3:
            out.sigma_star = pq / (pq - 1.0);
            out.formula = "pq/(pq-1)";
            break;
        case Regime::Thm4:
            out.sigma_star = kInf;
            out.cinf = true;
            out.formula = "C-infinity";
            break;
        case Regime::Inadmissible:
            break;
    }
    return out;
}

namespace {

struct Envelope {
    std::vector<double> xi, mag;
    bool monotone_violated = false;
};

// per-dyad maxima: one representative per octave, suppressing interference nulls
Envelope dyadic_envelope(std::span<const double> xi, std::span<const double> mag) {
    Envelope env;
    std::size_t i = 0;
    while (i < xi.size()) {
        const double lo = xi[i];
        double best_mag = mag[i];
        double best_xi = xi[i];
        std::size_t j = i;
        while (j < xi.size() && xi[j] < 2.0 * lo) {
            if (mag[j] > best_mag) {
                best_mag = mag[j];
                best_xi = xi[j];
            }
            ++j;
        }
        env.xi.push_back(best_xi);
        env.mag.push_back(best_mag);
        i = j;
    }
    for (std::size_t k = 1; k < env.mag.size(); ++k) {
        if (env.mag[k] > env.mag[k - 1]) env.monotone_violated = true;
    }
    return env;
}

struct Lsq {
    double slope, intercept, residual;
};

Lsq lsq(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double var = sxx - sx * sx / n;
    if (!(var > 0.0)) throw ConfigError("degenerate abscissae in decay fit");
    const double slope = (sxy - sx * sy / n) / var;
    const double intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ss += r * r;
    }
    return {slope, intercept, std::sqrt(ss / n)};
}

// Gauss-Newton on log m_i = mu - delta xi_i^kappa with Levenberg damping.
// Returns true on convergence; parameters updated in place.
bool refine_gevrey(const std::vector<double>& xi, const std::vector<double>& logm, double& mu,
                   double& delta, double& kappa) {
    const std::size_t n = xi.size();
    double lambda = 1e-3;
    auto cost = [&](double m_, double d_, double k_) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = logm[i] - (m_ - d_ * std::pow(xi[i], k_));
            ss += r * r;
        }
        return ss;
    };
    double f = cost(mu, delta, kappa);
    for (int iter = 0; iter < 80; ++iter) {
        double JtJ[3][3] = {};
        double Jtr[3] = {};
        for (std::size_t i = 0; i < n; ++i) {
            const double xk = std::pow(xi[i], kappa);
            const double r = logm[i] - (mu - delta * xk);
            const double J[3] = {1.0, -xk, -delta * xk * std::log(xi[i])};
            for (int a = 0; a < 3; ++a) {
                Jtr[a] += J[a] * r;
                for (int b = 0; b < 3; ++b) JtJ[a][b] += J[a] * J[b];
            }
        }
        for (int a = 0; a < 3; ++a) JtJ[a][a] *= 1.0 + lambda;
        // solve 3x3 by Cramer
        const auto det3 = [](double A[3][3]) {
            return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                   A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                   A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
        };
        const double det = det3(JtJ);
        if (std::abs(det) < 1e-300) return false;
        double dx[3];
        for (int col = 0; col < 3; ++col) {
            double Acol[3][3];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) Acol[a][b] = (b == col) ? Jtr[a] : JtJ[a][b];
            dx[col] = det3(Acol) / det;
        }
        const double mu2 = mu + dx[0];
        const double d2 = delta + dx[1];
        const double k2 = std::clamp(kappa + dx[2], 0.02, 1.5);
        if (!(d2 > 0.0)) {
            lambda *= 10.0;
            continue;
        }
        const double f2 = cost(mu2, d2, k2);
        if (f2 < f) {
            const bool done = std::abs(f - f2) < 1e-14 * (1.0 + f);
            mu = mu2;
            delta = d2;
            kappa = k2;
            f = f2;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (done) return true;
        } else {
            lambda *= 10.0;
            if (lambda > 1e8) return true;  // stalled at the optimum
        }
    }
    return true;
}

}  // namespace

GevreyFit fit_decay(std::span<const double> xi, std::span<const double> magnitudes,
                    GevreyProfile::Kind kind) {
    if (xi.size() != magnitudes.size()) throw ConfigError("xi/magnitude size mismatch");
    if (xi.size() < 8) throw ConfigError("decay fit needs >= 8 grid points");
    if (!(xi.back() / xi.front() >= 4.0)) {
        throw ConfigError("decay fit needs >= 2 dyadic decades");
    }
    for (double m : magnitudes) {
        if (!(m > 0.0)) throw ConfigError("decay fit requires positive magnitudes");
    }

    GevreyFit fit;
    fit.kind = kind;
    Envelope env = dyadic_envelope(xi, magnitudes);
    fit.xi_env = env.xi;
    fit.mag_env = env.mag;
    fit.monotone_warning = env.monotone_violated;

    std::vector<double> lx(env.xi.size()), ly(env.xi.size());
    for (std::size_t i = 0; i < env.xi.size(); ++i) lx[i] = std::log(env.xi[i]);

    if (kind == GevreyProfile::Kind::PolynomialDecay) {
        for (std::size_t i = 0; i < env.mag.size(); ++i) ly[i] = std::log(env.mag[i]);
        const Lsq f = lsq(lx, ly);
        fit.raw_slope = f.slope;
        fit.raw_intercept = f.intercept;
        fit.poly_order = -f.slope;
        fit.residual = f.residual;
        return fit;
    }

    // double-log transform with the documented normalization
    const double mhat = std::exp(1.0) * *std::max_element(env.mag.begin(), env.mag.end());
    for (std::size_t i = 0; i < env.mag.size(); ++i) {
        ly[i] = std::log(-std::log(env.mag[i] / mhat));
    }
    const Lsq f = lsq(lx, ly);
    fit.raw_slope = f.slope;
    fit.raw_intercept = f.intercept;

    double kappa = std::clamp(f.slope, 0.05, 1.4);
    double delta = std::exp(f.intercept);
    double mu = std::log(mhat);
    std::vector<double> logm(env.mag.size());
    for (std::size_t i = 0; i < env.mag.size(); ++i) logm[i] = std::log(env.mag[i]);
    fit.refined = refine_gevrey(env.xi, logm, mu, delta, kappa);

    fit.sigma_eff = 1.0 / kappa;
    fit.delta_eff = delta;
    double ss = 0;
    for (std::size_t i = 0; i < env.xi.size(); ++i) {
        const double r = logm[i] - (mu - delta * std::pow(env.xi[i], kappa));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / double(env.xi.size()));
    return fit;
}

}  // namespace singlab
