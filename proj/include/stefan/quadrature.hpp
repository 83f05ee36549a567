#pragma once

#include "stefan/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <numbers>
#include <string>
#include <vector>

namespace stefan {

/// Quadrature nodes and weights on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule of the given order; nodes ascending, symmetric to rounding.
inline QuadratureRule gauss_legendre(int order) {
    if (order < 1) throw PreconditionError("Gauss-Legendre order must be >= 1");
    const auto n = static_cast<std::size_t>(order);
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Adaptive Gauss-Kronrod integration; throws QuadratureError naming `label`
/// when the error estimate stays above the requested relative tolerance.
template <class F>
double adaptive_integrate(F&& f, double a, double b, double rel_tol, const std::string& label) {
    if (a == b) return 0.0;
    if (a > b) return -adaptive_integrate(std::forward<F>(f), b, a, rel_tol, label);
    double error = 0.0;
    double l1 = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 25, rel_tol, &error, &l1);
    if (!std::isfinite(value) || error > rel_tol * std::max(l1, 1e-300) * 10.0 + 1e-300) {
        throw QuadratureError("quadrature did not converge on " + label + " [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]: error estimate " + std::to_string(error));
    }
    return value;
}

/// Nested adaptive integral of f(x, y) over [x0,x1] x [y0,y1].
template <class F>
double adaptive_integrate_2d(F&& f, double x0, double x1, double y0, double y1, double rel_tol,
                             const std::string& label) {
    auto inner = [&](double y) {
        return adaptive_integrate([&](double x) { return f(x, y); }, x0, x1, rel_tol * 0.1, label);
    };
    return adaptive_integrate(inner, y0, y1, rel_tol, label);
}

} // namespace stefan
