#pragma once

// Uniform space-time grid, Steklov cell averages of the problem data, the
// control maps Q_n (function -> cell averages) and P_n (averages -> piecewise
// linear), discrete and continuous W_2^1 norms, and projection onto the ball.

#include "stefan/error.hpp"
#include "stefan/function.hpp"
#include "stefan/io.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace stefan {

struct Grid {
    int n = 1;  ///< time steps
    int m = 1;  ///< space cells
    double T = 1.0;
    double L = 1.0;

    Grid() = default;
    Grid(int n_, int m_, double T_, double L_) : n(n_), m(m_), T(T_), L(L_) {
        if (n < 1 || m < 1) throw PreconditionError("grid: n and m must be >= 1");
        if (!(T > 0.0) || !(L > 0.0) || !std::isfinite(T) || !std::isfinite(L))
            throw PreconditionError("grid: T and L must be positive and finite");
    }

    double tau() const { return T / n; }
    double h() const { return L / m; }
    double t(int k) const { return k == n ? T : k * tau(); }
    double x(int i) const { return i == m ? L : i * h(); }
};

/// Continuous problem data on D = (0, L) x (0, T).
struct ProblemData {
    FieldFunction f;        ///< source f(x, t)
    ScalarFunction p;       ///< right flux v_x(L, t)
    ScalarFunction phi;     ///< initial transformed temperature Phi(x)
    ScalarFunction gamma;   ///< measured right-boundary trace Gamma(t)
};

/// Cell averages of the data; k is 1-based in time, i 0-based in space.
class SteklovData {
public:
    SteklovData() = default;
    SteklovData(int n, int m, std::vector<double> f, std::vector<double> p, std::vector<double> gamma,
                std::vector<double> phi, double R)
        : n_(n), m_(m), f_(std::move(f)), p_(std::move(p)), gamma_(std::move(gamma)), phi_(std::move(phi)), R_(R) {
        if (f_.size() != static_cast<std::size_t>(n) * m || p_.size() != static_cast<std::size_t>(n) ||
            gamma_.size() != static_cast<std::size_t>(n) || phi_.size() != static_cast<std::size_t>(m) + 1)
            throw PreconditionError("Steklov data: array shapes inconsistent with the grid");
    }

    int n() const { return n_; }
    int m() const { return m_; }
    double R() const { return R_; }

    double f(int i, int k) const { return f_[static_cast<std::size_t>(k - 1) * m_ + i]; }
    double p(int k) const { return p_[static_cast<std::size_t>(k - 1)]; }
    double gamma(int k) const { return gamma_[static_cast<std::size_t>(k - 1)]; }
    double phi(int i) const { return phi_[static_cast<std::size_t>(i)]; }

    const std::vector<double>& f_avg() const { return f_; }
    const std::vector<double>& p_avg() const { return p_; }
    const std::vector<double>& gamma_avg() const { return gamma_; }
    const std::vector<double>& phi_avg() const { return phi_; }

    void set_gamma(std::vector<double> gamma) {
        if (gamma.size() != static_cast<std::size_t>(n_)) throw PreconditionError("Steklov data: Gamma length");
        gamma_ = std::move(gamma);
    }

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<double> f_, p_, gamma_, phi_;
    double R_ = 0.0;
};

inline SteklovData steklov_averages(const ProblemData& data, const Grid& grid, double R) {
    const int n = grid.n;
    const int m = grid.m;
    std::vector<double> f(static_cast<std::size_t>(n) * m);
    std::vector<double> p(n), gamma(n), phi(m + 1);
    for (int k = 1; k <= n; ++k) {
        const double t0 = grid.t(k - 1);
        const double t1 = grid.t(k);
        p[k - 1] = data.p.average(t0, t1);
        gamma[k - 1] = data.gamma.average(t0, t1);
        for (int i = 0; i < m; ++i) {
            const double x0 = grid.x(i);
            const double x1 = grid.x(i + 1);
            f[static_cast<std::size_t>(k - 1) * m + i] = data.f.integrate(x0, x1, t0, t1) / ((x1 - x0) * (t1 - t0));
        }
    }
    for (int i = 0; i < m; ++i) phi[i] = data.phi.average(grid.x(i), grid.x(i + 1));
    phi[m] = data.phi(grid.L);
    return SteklovData(n, m, std::move(f), std::move(p), std::move(gamma), std::move(phi), R);
}

/// Discrete control [g]_n = (g_0, ..., g_n).
struct DiscreteControl {
    std::vector<double> g;

    DiscreteControl() = default;
    explicit DiscreteControl(std::vector<double> values) : g(std::move(values)) {}
    static DiscreteControl zeros(int n) { return DiscreteControl(std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)); }

    int n() const { return static_cast<int>(g.size()) - 1; }
    double operator[](int k) const { return g[static_cast<std::size_t>(k)]; }
    double& operator[](int k) { return g[static_cast<std::size_t>(k)]; }
    bool operator==(const DiscreteControl&) const = default;
};

inline void check_control(const DiscreteControl& gd, const Grid& grid) {
    if (gd.g.size() != static_cast<std::size_t>(grid.n) + 1)
        throw PreconditionError("control length " + std::to_string(gd.g.size()) + " does not match n + 1 = " +
                                std::to_string(grid.n + 1));
}

/// Q_n: cell averages over [t_{k-1}, t_k] for k >= 1 and g_0 = g(0).
inline DiscreteControl qn_map(const ScalarFunction& g, const Grid& grid) {
    if (g.kind() == ScalarFunction::Kind::samples &&
        g.samples().knots.size() < static_cast<std::size_t>(10) * grid.n)
        throw PreconditionError("sampled control needs at least 10 n = " + std::to_string(10 * grid.n) + " samples");
    DiscreteControl gd = DiscreteControl::zeros(grid.n);
    gd[0] = g.kind() == ScalarFunction::Kind::samples ? g.samples().values.front() : g(0.0);
    for (int k = 1; k <= grid.n; ++k) gd[k] = g.average(grid.t(k - 1), grid.t(k));
    return gd;
}

/// Q_n of an exact piecewise-linear function such as a P_n image. Cell
/// integrals are exact, so no sample-density requirement applies.
inline DiscreteControl qn_map(const PiecewiseLinear& g, const Grid& grid) {
    DiscreteControl gd = DiscreteControl::zeros(grid.n);
    gd[0] = g(0.0);
    for (int k = 1; k <= grid.n; ++k) gd[k] = g.integrate(grid.t(k - 1), grid.t(k)) / (grid.t(k) - grid.t(k - 1));
    return gd;
}

/// P_n: the continuous piecewise-linear function with values g_k at t_k.
inline PiecewiseLinear pn_map(const DiscreteControl& gd, const Grid& grid) {
    check_control(gd, grid);
    std::vector<double> t(static_cast<std::size_t>(grid.n) + 1);
    for (int k = 0; k <= grid.n; ++k) t[k] = grid.t(k);
    return PiecewiseLinear(std::move(t), gd.g);
}

inline double w21_discrete_norm(const DiscreteControl& gd, const Grid& grid) {
    check_control(gd, grid);
    const double tau = grid.tau();
    double s = 0.0;
    for (int k = 1; k <= grid.n; ++k) {
        const double d = (gd[k] - gd[k - 1]) / tau;
        s += tau * gd[k] * gd[k] + tau * d * d;
    }
    return std::sqrt(s);
}

/// Exact W_2^1(0, T) norm of a piecewise-linear function.
inline double w21_continuous_norm(const PiecewiseLinear& g) {
    double s = 0.0;
    for (std::size_t j = 1; j < g.knots.size(); ++j) {
        const double dt = g.knots[j] - g.knots[j - 1];
        const double a = g.values[j - 1];
        const double b = g.values[j];
        s += dt * (a * a + a * b + b * b) / 3.0 + (b - a) * (b - a) / dt;
    }
    return std::sqrt(s);
}

/// Radial projection onto the discrete ball of radius R.
inline DiscreteControl project_to_ball(const DiscreteControl& gd, double R, const Grid& grid) {
    if (!(R > 0.0)) throw PreconditionError("projection radius must be positive");
    const double norm = w21_discrete_norm(gd, grid);
    if (norm <= R) return gd;
    DiscreteControl out = gd;
    const double scale = R / norm;
    for (double& v : out.g) v *= scale;
    return out;
}

/// One CSV per array: f_avg.csv (k,i,value), p_avg.csv, gamma_avg.csv (k,value), phi_avg.csv (i,value).
inline void write_steklov_csv(const SteklovData& sd, const std::filesystem::path& dir) {
    {
        auto out = io::open_output(dir / "f_avg.csv");
        out << "k,i,value\n";
        for (int k = 1; k <= sd.n(); ++k)
            for (int i = 0; i < sd.m(); ++i) out << k << ',' << i << ',' << io::fmt(sd.f(i, k)) << '\n';
    }
    auto series = [&](const char* name, auto get) {
        auto out = io::open_output(dir / name);
        out << "k,value\n";
        for (int k = 1; k <= sd.n(); ++k) out << k << ',' << io::fmt(get(k)) << '\n';
    };
    series("p_avg.csv", [&](int k) { return sd.p(k); });
    series("gamma_avg.csv", [&](int k) { return sd.gamma(k); });
    auto out = io::open_output(dir / "phi_avg.csv");
    out << "i,value\n";
    for (int i = 0; i <= sd.m(); ++i) out << i << ',' << io::fmt(sd.phi(i)) << '\n';
}

} // namespace stefan
