#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "singlab/errors.hpp"

namespace singlab {

enum class SingularAt { None, Left, Right, Interior };

/// Quadrature partition whose breakpoints accumulate algebraically toward a
/// singular point: the k-th breakpoint sits at distance span*(k/N)^g from it.
/// An interior singular point is handled as two one-sided meshes.
struct GradedMesh {
    double a = 0.0;
    double b = 1.0;
    SingularAt where = SingularAt::None;
    double interior_point = std::numeric_limits<double>::quiet_NaN();
    double grading = 3.0;
    int panels = 24;

    static GradedMesh plain(double a, double b, int panels = 24) {
        return GradedMesh{a, b, SingularAt::None, std::numeric_limits<double>::quiet_NaN(), 3.0, panels};
    }
    static GradedMesh singular_left(double a, double b, double g = 3.0, int panels = 24) {
        return GradedMesh{a, b, SingularAt::Left, std::numeric_limits<double>::quiet_NaN(), g, panels};
    }
    static GradedMesh singular_right(double a, double b, double g = 3.0, int panels = 24) {
        return GradedMesh{a, b, SingularAt::Right, std::numeric_limits<double>::quiet_NaN(), g, panels};
    }
    static GradedMesh singular_interior(double a, double b, double t_s, double g = 3.0, int panels = 24) {
        if (!(t_s > a && t_s < b)) throw ConfigError("interior singular point not inside interval");
        return GradedMesh{a, b, SingularAt::Interior, t_s, g, panels};
    }

    double span() const { return b - a; }

    /// Breakpoints in ascending order. Meshes graded toward a singular endpoint
    /// stop one floor-width short of it; the sliver is covered by the shell
    /// extrapolation in integrate().
    std::vector<double> breakpoints() const;
};

struct QuadResult {
    double value = 0.0;
    double error_bound = 0.0;
    std::int64_t evals = 0;
    bool hit_floor = false;

    QuadResult& operator+=(const QuadResult& o) {
        value += o.value;
        error_bound += o.error_bound;
        evals += o.evals;
        hit_floor = hit_floor || o.hit_floor;
        return *this;
    }
};

namespace detail {

// Gauss-Legendre, order 8, on [-1, 1].
inline constexpr double kGaussX[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr double kGaussW[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

constexpr double kPanelFloorRel = 1e-13;  // relative to mesh span
constexpr int kMaxDepth = 52;

template <class F>
double gauss8(F&& f, double a, double b, std::int64_t& evals) {
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += kGaussW[i] * f(mid + hw * kGaussX[i]);
    evals += 8;
    return s * hw;
}

struct AdaptTotals {
    double value = 0.0;
    double err = 0.0;
    std::int64_t evals = 0;
    std::int64_t evals_left = std::int64_t(1) << 62;
    bool hit_floor = false;
    // innermost two accepted leaf values adjacent to a singular endpoint
    double shell_inner = 0.0, shell_next = 0.0;
    bool shells_set = false;
};

// Depth-first adaptive bisection. tol_node is an absolute budget for this
// subinterval; it is split between children in proportion to their mass so
// refinement concentrates where the integral lives. Refinement also stops
// when the eval budget is exhausted (frequencies growing without bound toward
// the singular point are unresolvable at the panel floor); the unresolved
// discrepancy goes into the error bound.
template <class F>
void adapt(F& f, AdaptTotals& st, double floor_width, double a, double b, double q_whole,
           double tol_node, int depth) {
    const double m = 0.5 * (a + b);
    const double ql = gauss8(f, a, m, st.evals);
    const double qr = gauss8(f, m, b, st.evals);
    st.evals_left -= 16;
    const double q2 = ql + qr;
    const double delta = std::abs(q2 - q_whole);
    if (delta <= tol_node || (b - a) <= 2.0 * floor_width || depth >= kMaxDepth ||
        st.evals_left <= 0) {
        if (delta > tol_node) st.hit_floor = true;
        st.value += q2;
        st.err += delta;
        return;
    }
    const double wl = std::abs(ql), wr = std::abs(qr);
    const double tiny = 1e-300;
    double frac = (wl + tiny) / (wl + wr + 2.0 * tiny);
    frac = std::clamp(frac, 0.05, 0.95);
    adapt(f, st, floor_width, a, m, ql, tol_node * frac, depth + 1);
    adapt(f, st, floor_width, m, b, qr, tol_node * (1.0 - frac), depth + 1);
}

/// x^e with a multiplicative fast path for small integer exponents; the
/// coefficient formulas hit this with e in {-3,...,3} almost everywhere.
inline double pow_fast(double x, double e) {
    const double r = std::floor(e);
    if (r == e && std::abs(e) <= 8.0) {
        double p = 1.0;
        for (int i = 0; i < int(std::abs(e)); ++i) p *= x;
        return e < 0.0 ? 1.0 / p : p;
    }
    return std::pow(x, e);
}

}  // namespace detail

/// Adaptive Gauss-Legendre (order 8) quadrature over a graded mesh.
/// Panels are bisected until the local change drops below the allotted share
/// of tol (relative to the whole integral) or the panel floor 1e-13*span is
/// reached. The remainder beyond the innermost shell is estimated by
/// geometric extrapolation of the last two shells and added to the error
/// bound; a non-contracting shell sequence raises QuadratureError.
/// Panel results are summed left-to-right, so the value is reproducible for
/// a fixed panel set.
template <class F>
QuadResult integrate(F&& f, const GradedMesh& mesh, double tol,
                     std::int64_t max_evals = std::int64_t(1) << 62) {
    if (!(tol > 0.0)) throw ConfigError("quadrature tol must be positive");
    if (!(mesh.b > mesh.a)) throw ConfigError("empty quadrature interval");

    const std::vector<double> bps = mesh.breakpoints();
    const double floor_width = detail::kPanelFloorRel * mesh.span();
    const std::size_t n = bps.size() - 1;

    std::int64_t evals = 0;
    std::vector<double> coarse(n);
    for (std::size_t i = 0; i < n; ++i) coarse[i] = detail::gauss8(f, bps[i], bps[i + 1], evals);

    auto run = [&](double tol_abs) {
        detail::AdaptTotals out;
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) wsum += std::abs(coarse[i]);
        std::vector<double> leaf_values(n), leaf_errors(n);
        std::int64_t evals_left = max_evals;
        for (std::size_t i = 0; i < n; ++i) {
            const double share = (wsum > 0.0) ? (std::abs(coarse[i]) + wsum / double(n) * 0.1) /
                                                    (wsum * 1.1)
                                              : 1.0 / double(n);
            detail::AdaptTotals node;
            node.evals_left = evals_left;
            detail::adapt(f, node, floor_width, bps[i], bps[i + 1], coarse[i], tol_abs * share, 0);
            evals_left = node.evals_left;
            leaf_values[i] = node.value;
            leaf_errors[i] = node.err;
            out.evals += node.evals;
            out.hit_floor = out.hit_floor || node.hit_floor;
        }
        // fixed left-to-right reduction
        for (std::size_t i = 0; i < n; ++i) out.value += leaf_values[i];
        for (std::size_t i = 0; i < n; ++i) out.err += leaf_errors[i];
        // innermost shells for the singular-endpoint remainder
        if (mesh.where == SingularAt::Right && n >= 2) {
            out.shell_inner = leaf_values[n - 1];
            out.shell_next = leaf_values[n - 2];
            out.shells_set = true;
        } else if (mesh.where == SingularAt::Left && n >= 2) {
            out.shell_inner = leaf_values[0];
            out.shell_next = leaf_values[1];
            out.shells_set = true;
        }
        return out;
    };

    double scale0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale0 += std::abs(coarse[i]);
    double tol_abs = tol * std::max(scale0, 1e-300);
    auto st = run(tol_abs);
    // the coarse pass can underestimate the mass badly for singular or
    // oscillatory integrands; rerun once with a corrected absolute budget
    if (std::abs(st.value) > 4.0 * std::max(scale0, 1e-300)) {
        tol_abs = tol * std::abs(st.value);
        auto st2 = run(tol_abs);
        st2.evals += st.evals + evals;
        st = st2;
    } else {
        st.evals += evals;
    }

    QuadResult res;
    res.value = st.value;
    res.error_bound = 4.0 * st.err;
    res.evals = st.evals;
    res.hit_floor = st.hit_floor;

    if (mesh.where != SingularAt::None && mesh.where != SingularAt::Interior && st.shells_set) {
        const double s1 = std::abs(st.shell_inner);
        const double s2 = std::abs(st.shell_next);
        const double significant = 1e-3 * tol_abs;
        if (s1 > significant && s2 > 0.0) {
            const double rho = s1 / s2;
            if (rho >= 1.0 - 1e-9) {
                throw QuadratureError(
                    "quadrature shells do not contract toward the singular point "
                    "(non-integrable singularity); innermost shells " +
                    std::to_string(s2) + ", " + std::to_string(s1));
            }
            res.error_bound += s1 * std::min(rho / (1.0 - rho), 1e6);
        }
    } else if (mesh.where == SingularAt::Interior) {
        GradedMesh left = GradedMesh::singular_right(mesh.a, mesh.interior_point, mesh.grading, mesh.panels);
        GradedMesh right = GradedMesh::singular_left(mesh.interior_point, mesh.b, mesh.grading, mesh.panels);
        QuadResult out = integrate(f, left, tol, max_evals / 2);
        out += integrate(f, right, tol, max_evals / 2);
        return out;
    }
    return res;
}

namespace detail {

// scans |f| toward the singular endpoint at two truncation depths; a growing
// node maximum flags an essential-sup divergence
template <class F>
bool sup_diverges(F&& f, const GradedMesh& mesh, double* sup_out, std::int64_t& evals) {
    if (mesh.where == SingularAt::None) return false;
    if (mesh.where == SingularAt::Interior) {
        GradedMesh l = GradedMesh::singular_right(mesh.a, mesh.interior_point, mesh.grading, mesh.panels);
        GradedMesh r = GradedMesh::singular_left(mesh.interior_point, mesh.b, mesh.grading, mesh.panels);
        double s1 = 0, s2 = 0;
        const bool d1 = sup_diverges(f, l, &s1, evals);
        const bool d2 = sup_diverges(f, r, &s2, evals);
        *sup_out = std::max(s1, s2);
        return d1 || d2;
    }
    const bool at_right = mesh.where == SingularAt::Right;
    const double sing = at_right ? mesh.b : mesh.a;
    const double far = at_right ? mesh.a : mesh.b;
    auto scan = [&](double depth_rel) {
        double sup = 0.0;
        // geometric ladder of probe distances from the singular point
        for (double drel = 0.5; drel >= depth_rel; drel *= 0.5) {
            const double t = sing + (far - sing) * drel;
            sup = std::max(sup, std::abs(f(t)));
            ++evals;
        }
        return sup;
    };
    const double sup_shallow = scan(1e-10);
    const double sup_deep = scan(1e-13);
    *sup_out = sup_deep;
    return sup_deep > 1.5 * sup_shallow && sup_deep > 1e-12;
}

}  // namespace detail

/// L^q norm of f over the mesh interval. q < inf goes through integrate();
/// q = inf takes the essential sup over the (refined) quadrature nodes, with
/// a two-depth scan toward the singular point to detect divergence.
template <class F>
QuadResult lq_norm(F&& f, double q, const GradedMesh& mesh, double tol,
                   std::int64_t max_evals = std::int64_t(1) << 62) {
    if (!(q >= 1.0)) throw ConfigError("Lq exponent must satisfy q >= 1");
    if (std::isinf(q)) {
        std::int64_t evals = 0;
        double sup_near = 0.0;
        if (detail::sup_diverges(f, mesh, &sup_near, evals)) {
            throw QuadratureError("essential sup grows without bound toward the singular point");
        }
        double sup = sup_near;
        auto track = [&](double t) {
            const double v = std::abs(f(t));
            if (v > sup) sup = v;
            return v;
        };
        QuadResult r = integrate(track, mesh, std::max(tol, 1e-6), max_evals);
        QuadResult out;
        out.value = sup;
        out.error_bound = 0.0;
        out.evals = r.evals + evals;
        out.hit_floor = r.hit_floor;
        return out;
    }
    auto powq = [&](double t) { return std::pow(std::abs(f(t)), q); };
    QuadResult r = integrate(powq, mesh, tol, max_evals);
    QuadResult out;
    if (r.value <= 0.0) {
        out.value = 0.0;
        out.error_bound = 0.0;
    } else {
        out.value = std::pow(r.value, 1.0 / q);
        out.error_bound = r.error_bound / q * std::pow(r.value, 1.0 / q - 1.0);
    }
    out.evals = r.evals;
    out.hit_floor = r.hit_floor;
    return out;
}

}  // namespace singlab
