#include "singlab/quadrature.hpp"

#include <cmath>

namespace singlab {

std::vector<double> GradedMesh::breakpoints() const {
    std::vector<double> bp;
    const double w = span();
    const double gap = detail::kPanelFloorRel * w;

    auto graded_toward = [&](double from, double to, int n, std::vector<double>& out) {
        // distances from `to` follow (k/n)^g, stopping one floor-width short
        out.push_back(from);
        const double len = to - from;
        for (int k = n - 1; k >= 1; --k) {
            const double dist = std::abs(len) * std::pow(double(k) / double(n), grading);
            if (std::abs(dist) <= gap) continue;
            out.push_back(to - (len > 0 ? dist : -dist));
        }
        out.push_back(to - (len > 0 ? gap : -gap));
    };

    switch (where) {
        case SingularAt::None: {
            for (int k = 0; k <= panels; ++k) bp.push_back(a + w * double(k) / double(panels));
            break;
        }
        case SingularAt::Right: {
            graded_toward(a, b, panels, bp);
            break;
        }
        case SingularAt::Left: {
            std::vector<double> rev;
            graded_toward(b, a, panels, rev);
            for (auto it = rev.rbegin(); it != rev.rend(); ++it) bp.push_back(*it);
            break;
        }
        case SingularAt::Interior: {
            // handled by splitting in integrate(); provide a plain partition here
            for (int k = 0; k <= panels; ++k) bp.push_back(a + w * double(k) / double(panels));
            break;
        }
    }
    // enforce strict monotonicity (graded points can collide in float at high k)
    std::vector<double> out;
    out.reserve(bp.size());
    for (double x : bp) {
        if (out.empty() || x > out.back()) out.push_back(x);
    }
    if (out.size() < 2) {
        out = {a, b};
    }
    return out;
}

}  // namespace singlab
