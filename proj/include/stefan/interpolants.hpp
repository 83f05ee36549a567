#pragma once

// Interpolants of a discrete state, the l_inf and energy norms of the discrete
// solution, and the residual of the weak (integral) formulation.

#include "stefan/discretization.hpp"
#include "stefan/error.hpp"
#include "stefan/physics.hpp"
#include "stefan/quadrature.hpp"
#include "stefan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace stefan {

/// tilde_v: piecewise constant v_i(k) on [x_i, x_{i+1}) x (t_{k-1}, t_k].
/// v_tau:   piecewise linear in x (v_hat(x; k)), piecewise constant in t.
/// hat_v_tau: piecewise linear in x and linear in t between v_hat(x; k-1) and v_hat(x; k).
enum class InterpolantKind { tilde_v, hat_v_tau, v_tau };

struct Interpolant {
    InterpolantKind kind;
    const DiscreteState* state;
    Grid grid;

    Interpolant(InterpolantKind k, const DiscreteState& s, const Grid& g) : kind(k), state(&s), grid(g) {
        if (s.n() != g.n || s.m() != g.m) throw PreconditionError("interpolant: state shape does not match grid");
    }

    double operator()(double x, double t) const;
};

namespace detail {

struct CellLocation {
    int i;          ///< space cell, [x_i, x_{i+1}), last one closed
    int k;          ///< time cell (t_{k-1}, t_k]; 0 only for t = 0
    double xi;      ///< x - x_i
};

inline CellLocation locate(const Grid& g, double x, double t) {
    const double sx = 1e-12 * g.L;
    const double st = 1e-12 * g.T;
    if (!(x >= -sx && x <= g.L + sx && t >= -st && t <= g.T + st))
        throw PreconditionError("interpolant: (" + io::fmt(x) + ", " + io::fmt(t) + ") outside the domain");
    x = std::clamp(x, 0.0, g.L);
    t = std::clamp(t, 0.0, g.T);
    int i = std::min(static_cast<int>(std::floor(x / g.h())), g.m - 1);
    int k = t <= 0.0 ? 0 : std::clamp(static_cast<int>(std::ceil(t / g.tau())), 1, g.n);
    // Rounding near a node: keep the half-open conventions exact.
    if (i + 1 < g.m && x >= g.x(i + 1)) ++i;
    if (k > 1 && t <= g.t(k - 1)) --k;
    return {i, k, x - g.x(i)};
}

inline double hat_row(const DiscreteState& s, const Grid& g, int k, int i, double xi) {
    const double vi = s(k, i);
    return vi + (s(k, i + 1) - vi) / g.h() * xi;
}

} // namespace detail

inline double Interpolant::operator()(double x, double t) const {
    const auto loc = detail::locate(grid, x, t);
    const DiscreteState& s = *state;
    switch (kind) {
    case InterpolantKind::tilde_v:
        return s(loc.k, loc.i);
    case InterpolantKind::v_tau:
        return detail::hat_row(s, grid, loc.k, loc.i, loc.xi);
    case InterpolantKind::hat_v_tau: {
        if (loc.k == 0) return detail::hat_row(s, grid, 0, loc.i, loc.xi);
        const double a = detail::hat_row(s, grid, loc.k - 1, loc.i, loc.xi);
        const double b = detail::hat_row(s, grid, loc.k, loc.i, loc.xi);
        return a + (b - a) * (t - grid.t(loc.k - 1)) / grid.tau();
    }
    }
    return 0.0;
}

inline double evaluate(const Interpolant& interp, double x, double t) { return interp(x, t); }

/// max_k max_i |v_i(k)|
inline double linf_norm(const DiscreteState& s) {
    double r = 0.0;
    for (double x : s.values()) r = std::max(r, std::abs(x));
    return r;
}

struct EnergyTerms {
    double time_derivative;  ///< sum_k tau sum_i h v_{i tbar}^2
    double max_gradient;     ///< max_k sum_i h v_{ix}^2
    double mixed;            ///< sum_k tau^2 sum_i h v_{ix tbar}^2

    double squared() const { return time_derivative + max_gradient + mixed; }
    double norm() const { return std::sqrt(squared()); }
};

inline EnergyTerms energy_terms(const DiscreteState& s, const Grid& g) {
    if (s.n() != g.n || s.m() != g.m) throw PreconditionError("energy_norm: state shape does not match grid");
    const double h = g.h();
    const double tau = g.tau();
    EnergyTerms e{0.0, 0.0, 0.0};
    for (int k = 1; k <= g.n; ++k) {
        double grad = 0.0;
        for (int i = 0; i < g.m; ++i) {
            const double vt = (s(k, i) - s(k - 1, i)) / tau;
            const double vx = (s(k, i + 1) - s(k, i)) / h;
            const double vx_prev = (s(k - 1, i + 1) - s(k - 1, i)) / h;
            const double vxt = (vx - vx_prev) / tau;
            e.time_derivative += tau * h * vt * vt;
            grad += h * vx * vx;
            e.mixed += tau * tau * h * vxt * vxt;
        }
        e.max_gradient = std::max(e.max_gradient, grad);
    }
    return e;
}

inline double energy_norm(const DiscreteState& s, const Grid& g) { return energy_terms(s, g).norm(); }

/// Both sides of an L2 equivalence identity between interpolants.
struct L2Identity {
    double quadrature;   ///< integral of the squared difference, by cell-wise Gauss quadrature
    double closed_form;  ///< the same quantity from the difference-quotient formula
};

namespace detail {

template <class F>
double integrate_cells(const Grid& g, F&& integrand, int order = 4) {
    const QuadratureRule rule = gauss_legendre(order);
    const double h = g.h();
    const double tau = g.tau();
    double total = 0.0;
    for (int k = 1; k <= g.n; ++k) {
        const double t0 = g.t(k - 1);
        for (int i = 0; i < g.m; ++i) {
            const double x0 = g.x(i);
            double cell = 0.0;
            for (std::size_t a = 0; a < rule.size(); ++a) {
                const double t = t0 + 0.5 * tau * (1.0 + rule.nodes[a]);
                for (std::size_t b = 0; b < rule.size(); ++b) {
                    const double x = x0 + 0.5 * h * (1.0 + rule.nodes[b]);
                    cell += rule.weights[a] * rule.weights[b] * integrand(x, t);
                }
            }
            total += 0.25 * h * tau * cell;
        }
    }
    return total;
}

} // namespace detail

/// ||v_tau - hat_v_tau||^2 = (tau^2 / 3) ||d/dt hat_v_tau||^2 over D.
inline L2Identity vtau_hat_identity(const DiscreteState& s, const Grid& g) {
    const Interpolant vt(InterpolantKind::v_tau, s, g);
    const Interpolant vh(InterpolantKind::hat_v_tau, s, g);
    L2Identity r{};
    r.quadrature = detail::integrate_cells(g, [&](double x, double t) {
        const double d = vt(x, t) - vh(x, t);
        return d * d;
    });
    const double h = g.h();
    const double tau = g.tau();
    double dt2 = 0.0;
    for (int k = 1; k <= g.n; ++k)
        for (int i = 0; i < g.m; ++i) {
            const double a = (s(k, i) - s(k - 1, i)) / tau;
            const double b = (s(k, i + 1) - s(k - 1, i + 1)) / tau;
            dt2 += tau * h * (a * a + a * b + b * b) / 3.0;
        }
    r.closed_form = tau * tau / 3.0 * dt2;
    return r;
}

/// ||tilde_v - v_tau||^2 = sum_k sum_i tau h^3 v_{ix}^2(k) / 3.
inline L2Identity vtilde_vtau_identity(const DiscreteState& s, const Grid& g) {
    const Interpolant vt(InterpolantKind::tilde_v, s, g);
    const Interpolant vv(InterpolantKind::v_tau, s, g);
    L2Identity r{};
    r.quadrature = detail::integrate_cells(g, [&](double x, double t) {
        const double d = vt(x, t) - vv(x, t);
        return d * d;
    });
    const double h = g.h();
    double sum = 0.0;
    for (int k = 1; k <= g.n; ++k)
        for (int i = 0; i < g.m; ++i) {
            const double vx = (s(k, i + 1) - s(k, i)) / h;
            sum += g.tau() * h * h * h * vx * vx / 3.0;
        }
    r.closed_form = sum;
    return r;
}

/// Smooth test function psi(x, t) with its first partial derivatives.
struct TestFunction {
    std::string name;
    std::function<double(double, double)> value;
    std::function<double(double, double)> dx;
    std::function<double(double, double)> dt;
};

/// Test functions vanishing at t = T used by the automated weak-form checks.
inline std::vector<TestFunction> test_function_library(double T, double L) {
    const double pi = std::numbers::pi;
    return {
        {"(T-t)/T", [=](double, double t) { return (T - t) / T; }, [](double, double) { return 0.0; },
         [=](double, double) { return -1.0 / T; }},
        {"x(T-t)/T", [=](double x, double t) { return x * (T - t) / T; }, [=](double, double t) { return (T - t) / T; },
         [=](double x, double) { return -x / T; }},
        {"t(T-t)", [=](double, double t) { return t * (T - t); }, [](double, double) { return 0.0; },
         [=](double, double t) { return T - 2.0 * t; }},
        {"cos(pi x/L)(T-t)", [=](double x, double t) { return std::cos(pi * x / L) * (T - t); },
         [=](double x, double t) { return -pi / L * std::sin(pi * x / L) * (T - t); },
         [=](double x, double) { return -std::cos(pi * x / L); }},
    };
}

/// Left side of the integral identity of a weak solution, with B = B_0 = b_eps,
/// v replaced by hat_v_tau and g the (continuous) boundary control.
inline double weak_residual(const DiscreteState& s, const Grid& g, const TestFunction& psi,
                            const MollifiedEnthalpy& bm, const ProblemData& data, const ScalarFunction& control) {
    for (int j = 0; j <= 16; ++j) {
        const double x = g.L * j / 16.0;
        if (std::abs(psi.value(x, g.T)) > 1e-12)
            throw PreconditionError("weak_residual: test function " + psi.name + " does not vanish at t = T");
    }
    const QuadratureRule rule = gauss_legendre(4);
    const double h = g.h();
    const double tau = g.tau();
    double interior = 0.0;
    for (int k = 1; k <= g.n; ++k) {
        const double t0 = g.t(k - 1);
        for (int i = 0; i < g.m; ++i) {
            const double x0 = g.x(i);
            const double dx_prev = (s(k - 1, i + 1) - s(k - 1, i)) / h;
            const double dx_cur = (s(k, i + 1) - s(k, i)) / h;
            double cell = 0.0;
            for (std::size_t a = 0; a < rule.size(); ++a) {
                const double theta = 0.5 * (1.0 + rule.nodes[a]);
                const double t = t0 + tau * theta;
                const double vx = dx_prev + (dx_cur - dx_prev) * theta;
                for (std::size_t b = 0; b < rule.size(); ++b) {
                    const double xi = 0.5 * h * (1.0 + rule.nodes[b]);
                    const double x = x0 + xi;
                    const double v0 = s(k - 1, i) + dx_prev * xi;
                    const double v1 = s(k, i) + dx_cur * xi;
                    const double v = v0 + (v1 - v0) * theta;
                    cell += rule.weights[a] * rule.weights[b] *
                            (-bm(v) * psi.dt(x, t) + vx * psi.dx(x, t) - data.f(x, t) * psi.value(x, t));
                }
            }
            interior += 0.25 * h * tau * cell;
        }
    }
    double initial = 0.0;
    for (int i = 0; i < g.m; ++i)
        for (std::size_t b = 0; b < rule.size(); ++b) {
            const double x = g.x(i) + 0.5 * h * (1.0 + rule.nodes[b]);
            initial += 0.5 * h * rule.weights[b] * bm(data.phi(x)) * psi.value(x, 0.0);
        }
    double boundary = 0.0;
    for (int k = 1; k <= g.n; ++k)
        for (std::size_t a = 0; a < rule.size(); ++a) {
            const double t = g.t(k - 1) + 0.5 * tau * (1.0 + rule.nodes[a]);
            boundary += 0.5 * tau * rule.weights[a] *
                        (-data.p(t) * psi.value(g.L, t) + control(t) * psi.value(0.0, t));
        }
    return interior - initial + boundary;
}

} // namespace stefan
