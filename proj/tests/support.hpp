#pragma once

#include "stefan/physics.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

namespace stefan::testing {

inline ScalarFunction c(double v) { return ScalarFunction::constant(v); }

/// One phase, b(v) = slope * v.
inline PhaseSpec linear_material(double slope = 1.0) {
    PhaseSpec p;
    p.alpha_pieces = {c(slope)};
    p.k_pieces = {c(1.0)};
    return p;
}

/// Melting at u = 0 with latent heat gamma; beta = alpha/k in each phase.
inline PhaseSpec two_phase(double gamma = 1.0, double alpha_s = 1.0, double k_s = 1.0, double alpha_l = 1.0,
                           double k_l = 1.0) {
    PhaseSpec p;
    p.critical_temps = {0.0};
    p.latent_heats = {gamma};
    p.alpha_pieces = {c(alpha_s), c(alpha_l)};
    p.k_pieces = {c(k_s), c(k_l)};
    return p;
}

inline std::shared_ptr<const EnthalpyFunction> enthalpy(const PhaseSpec& p) {
    return std::make_shared<const EnthalpyFunction>(p);
}

/// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Root of an increasing function by plain bisection.
inline double bisection_root(const std::function<double(double)>& f, double lo, double hi, int halvings = 200) {
    for (int i = 0; i < halvings; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace stefan::testing
