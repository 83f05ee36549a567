#pragma once

// Implicit finite-difference solution of the mollified enthalpy problem.
//
// Row k of the discrete state solves, with c = h^2 / tau,
//   v_0 + c b(v_0) - v_1                 = c b(v_0(k-1)) + h^2 f_0k - h g_k
//   -v_{i-1} + 2 v_i + c b(v_i) - v_{i+1} = c b(v_i(k-1)) + h^2 f_ik,   0 < i < m
//   -v_{m-1} + v_m                       = h p_k
// Jacobi mode is the successive-approximation iteration started from v(k-1),
// one monotone scalar solve per node with neighbours frozen; its update
// A_N = max_i |v^{N+1}_i - v^N_i| contracts with factor
// delta = (1 + h^2 bbar / (4 tau))^{-1}.

#include "stefan/discretization.hpp"
#include "stefan/error.hpp"
#include "stefan/io.hpp"
#include "stefan/physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace stefan {

enum class SolverMode { jacobi, gauss_seidel, newton };

inline const char* to_string(SolverMode mode) {
    switch (mode) {
    case SolverMode::jacobi: return "jacobi";
    case SolverMode::gauss_seidel: return "gauss_seidel";
    case SolverMode::newton: return "newton";
    }
    return "?";
}

struct SolverParams {
    /// Stopping tolerance; the effective value is tol * (1 + ||v(k-1)||_inf).
    double tol = 1e-10;
    int max_iter = 200000;
    double scalar_tol = 1e-14;
    SolverMode mode = SolverMode::newton;

    void validate() const {
        if (!(tol > 0.0) || !(scalar_tol > 0.0)) throw PreconditionError("solver: tolerances must be positive");
        if (max_iter < 1) throw PreconditionError("solver: max_iter must be >= 1");
    }
};

struct StepReport {
    int step = 0;
    int iterations = 0;
    /// Update sizes A_0, A_1, ... of the iteration.
    std::vector<double> updates;
    double delta = 0.0;
    double final_update = 0.0;
    /// Sup-norm residual of the summation identity for this row.
    double residual = 0.0;

    /// Ratios A_N / A_{N-1}, recorded once A_{N-1} > 10 machine epsilon.
    std::vector<double> ratios() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < updates.size(); ++i)
            if (updates[i - 1] > 10.0 * std::numeric_limits<double>::epsilon())
                out.push_back(updates[i] / updates[i - 1]);
        return out;
    }

    /// Count of iterations with A_N > delta A_{N-1} + slack.
    int contraction_violations(double slack = 1e-12) const {
        int bad = 0;
        for (std::size_t i = 1; i < updates.size(); ++i)
            if (updates[i] > delta * updates[i - 1] + slack) ++bad;
        return bad;
    }
};

inline double contraction_factor(const Grid& grid, double bbar) {
    const double h = grid.h();
    return 1.0 / (1.0 + h * h / (2.0 * grid.tau()) * (bbar / 2.0));
}

/// v[k][i] = v_i(k), k = 0..n, i = 0..m.
class DiscreteState {
public:
    DiscreteState() = default;
    DiscreteState(int n, int m) : n_(n), m_(m), v_(static_cast<std::size_t>(n + 1) * (m + 1), 0.0) {}

    int n() const { return n_; }
    int m() const { return m_; }

    double operator()(int k, int i) const { return v_[index(k, i)]; }
    double& operator()(int k, int i) { return v_[index(k, i)]; }

    std::span<const double> row(int k) const { return {v_.data() + index(k, 0), static_cast<std::size_t>(m_) + 1}; }
    std::span<double> row(int k) { return {v_.data() + index(k, 0), static_cast<std::size_t>(m_) + 1}; }

    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    bool operator==(const DiscreteState&) const = default;

private:
    std::size_t index(int k, int i) const { return static_cast<std::size_t>(k) * (m_ + 1) + i; }

    int n_ = 0;
    int m_ = 0;
    std::vector<double> v_;
};

struct ScalarSolution {
    double x;
    EnthalpyValue b;  ///< b_eps and b_eps' at x
    int iterations;
};

/// Solves x + c b_eps(x) = rhs. The left side has slope >= 1, so starting from
/// x0 with residual r the root lies between x0 and x0 - r.
inline ScalarSolution scalar_monotone_solve(double c, double rhs, const MollifiedEnthalpy& bm, double x0,
                                            double scalar_tol = 1e-14) {
    if (!(c > 0.0)) throw PreconditionError("scalar solve: c must be positive");
    const double target = scalar_tol * std::max(1.0, std::abs(rhs));
    double x = x0;
    EnthalpyValue b = bm.evaluate(x);
    double r = x + c * b.value - rhs;
    if (std::abs(r) <= target) return {x, b, 0};
    double lo = r > 0.0 ? x - r : x;
    double hi = r > 0.0 ? x : x - r;
    for (int it = 1; it <= 400; ++it) {
        double next = x - r / (1.0 + c * b.derivative);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
        b = bm.evaluate(x);
        r = x + c * b.value - rhs;
        if (std::abs(r) <= target) return {x, b, it};
        if (r > 0.0) hi = x;
        else lo = x;
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return {x, b, it};
    }
    return {x, b, 400};
}

inline ScalarSolution scalar_monotone_solve(double c, double rhs, const MollifiedEnthalpy& bm) {
    return scalar_monotone_solve(c, rhs, bm, rhs, 1e-14);
}

namespace detail {

/// Inputs of one time row that do not change during the iteration.
struct RowSystem {
    int m;
    double h;
    double c;                  ///< h^2 / tau
    std::vector<double> rhs;   ///< right-hand sides for rows 0..m-1 (without neighbour terms)
    double closure;            ///< h p_k
};

inline RowSystem make_row_system(int k, std::span<const double> b_prev, const SteklovData& sd,
                                 const DiscreteControl& gd, const Grid& grid) {
    RowSystem sys;
    sys.m = grid.m;
    sys.h = grid.h();
    sys.c = sys.h * sys.h / grid.tau();
    sys.rhs.resize(static_cast<std::size_t>(grid.m));
    for (int i = 0; i < grid.m; ++i) sys.rhs[i] = sys.c * b_prev[i] + sys.h * sys.h * sd.f(i, k);
    sys.rhs[0] -= sys.h * gd[k];
    sys.closure = sys.h * sd.p(k);
    return sys;
}

/// Rows of the nonlinear system evaluated at v with b = b_eps(v); divided by h
/// these are the summation-identity residuals for the unit test vectors.
inline void row_residuals(const RowSystem& sys, std::span<const double> v, std::span<const double> b,
                          std::span<double> out) {
    const int m = sys.m;
    const double c = sys.c;
    if (m == 1) {
        out[0] = v[0] + c * b[0] - v[1] - sys.rhs[0];
    } else {
        out[0] = v[0] + c * b[0] - v[1] - sys.rhs[0];
        for (int i = 1; i < m; ++i) out[i] = -v[i - 1] + 2.0 * v[i] + c * b[i] - v[i + 1] - sys.rhs[i];
    }
    out[m] = v[m] - v[m - 1] - sys.closure;
}

inline double scaled_residual(const RowSystem& sys, std::span<const double> v, std::span<const double> b,
                              std::vector<double>& work) {
    work.resize(static_cast<std::size_t>(sys.m) + 1);
    row_residuals(sys, v, b, work);
    double r = 0.0;
    for (double x : work) r = std::max(r, std::abs(x));
    return r / sys.h;
}

inline double sup_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

} // namespace detail

struct StepResult {
    std::vector<double> row;
    std::vector<double> b;  ///< b_eps at the new row (reused by the next step)
    StepReport report;
};

/// Computes row k from row k-1. `b_prev` holds b_eps(v_prev).
inline StepResult solve_step(std::span<const double> v_prev, std::span<const double> b_prev, int k,
                             const SteklovData& sd, const DiscreteControl& gd, const Grid& grid,
                             const MollifiedEnthalpy& bm, const SolverParams& params) {
    const int m = grid.m;
    const auto M = static_cast<std::size_t>(m) + 1;
    if (v_prev.size() != M || b_prev.size() != M) throw PreconditionError("solve_step: row length mismatch");
    for (double x : v_prev)
        if (!std::isfinite(x)) throw PreconditionError("solve_step: previous row is not finite");
    const detail::RowSystem sys = detail::make_row_system(k, b_prev, sd, gd, grid);
    const double tol = params.tol * (1.0 + detail::sup_norm(v_prev));

    StepResult res;
    res.report.step = k;
    res.report.delta = contraction_factor(grid, bm.bbar());
    std::vector<double> cur(v_prev.begin(), v_prev.end());
    std::vector<double> bcur(b_prev.begin(), b_prev.end());
    std::vector<double> next(M), bnext(M), work(M);

    auto finish = [&](int iterations, double update) {
        res.report.iterations = iterations;
        res.report.final_update = update;
        res.report.residual = detail::scaled_residual(sys, cur, bcur, work);
        res.row = std::move(cur);
        res.b = std::move(bcur);
        return std::move(res);
    };

    if (params.mode == SolverMode::newton) {
        std::vector<double> resid(M), trial(M), btrial(M), rtrial(M), d(M);
        std::vector<double> diag(M), upper(M), lower(M);
        std::vector<double> deriv(M);
        for (std::size_t i = 0; i < M; ++i) deriv[i] = bm.derivative(cur[i]);
        detail::row_residuals(sys, cur, bcur, resid);
        double rnorm = detail::sup_norm(resid);
        for (int it = 1; it <= params.max_iter; ++it) {
            // Tridiagonal Jacobian; solve J d = -resid by the Thomas algorithm.
            for (int i = 0; i < m; ++i) {
                diag[i] = (i == 0 ? 1.0 : 2.0) + sys.c * deriv[i];
                upper[i] = -1.0;
                lower[i] = i == 0 ? 0.0 : -1.0;
            }
            diag[m] = 1.0;
            lower[m] = -1.0;
            upper[m] = 0.0;
            std::vector<double> cp(M), dp(M);
            cp[0] = upper[0] / diag[0];
            dp[0] = -resid[0] / diag[0];
            for (int i = 1; i <= m; ++i) {
                const double denom = diag[i] - lower[i] * cp[i - 1];
                cp[i] = upper[i] / denom;
                dp[i] = (-resid[i] - lower[i] * dp[i - 1]) / denom;
            }
            d[m] = dp[m];
            for (int i = m - 1; i >= 0; --i) d[i] = dp[i] - cp[i] * d[i + 1];

            double lambda = 1.0;
            double tnorm = 0.0;
            for (int ls = 0; ls < 40; ++ls) {
                for (std::size_t i = 0; i < M; ++i) {
                    trial[i] = cur[i] + lambda * d[i];
                    const EnthalpyValue ev = bm.evaluate(trial[i]);
                    btrial[i] = ev.value;
                    deriv[i] = ev.derivative;
                }
                detail::row_residuals(sys, trial, btrial, rtrial);
                tnorm = detail::sup_norm(rtrial);
                if (tnorm <= (1.0 - 1e-4 * lambda) * rnorm || rnorm < 1e-300) break;
                lambda *= 0.5;
            }
            double update = 0.0;
            for (std::size_t i = 0; i < M; ++i) update = std::max(update, std::abs(trial[i] - cur[i]));
            res.report.updates.push_back(update);
            cur.swap(trial);
            bcur.swap(btrial);
            resid.swap(rtrial);
            rnorm = tnorm;
            if (update <= tol && rnorm / sys.h <= tol) return finish(it, update);
        }
        throw SolverError("newton iteration did not converge at step " + std::to_string(k), k,
                          res.report.updates.empty() ? 0.0 : res.report.updates.back());
    }

    const bool in_place = params.mode == SolverMode::gauss_seidel;
    for (int it = 1; it <= params.max_iter; ++it) {
        const std::vector<double>& nb = in_place ? next : cur;
        if (in_place) next = cur;
        for (int i = 0; i < m; ++i) {
            ScalarSolution s;
            if (i == 0) {
                s = scalar_monotone_solve(sys.c, sys.rhs[0] + nb[1], bm, cur[0], params.scalar_tol);
            } else {
                const double rhs = 0.5 * (sys.rhs[i] + nb[i - 1] + nb[i + 1]);
                s = scalar_monotone_solve(0.5 * sys.c, rhs, bm, cur[i], params.scalar_tol);
            }
            next[i] = s.x;
            bnext[i] = s.b.value;
        }
        next[m] = next[m - 1] + sys.closure;
        bnext[m] = bm(next[m]);
        double update = 0.0;
        for (std::size_t i = 0; i < M; ++i) update = std::max(update, std::abs(next[i] - cur[i]));
        res.report.updates.push_back(update);
        cur.swap(next);
        bcur.swap(bnext);
        if (update <= tol && detail::scaled_residual(sys, cur, bcur, work) <= tol) return finish(it, update);
    }
    throw SolverError(std::string(to_string(params.mode)) + " iteration did not converge at step " +
                          std::to_string(k) + " (last update " + io::fmt(res.report.updates.back()) + ")",
                      k, res.report.updates.back());
}

struct SolveResult {
    DiscreteState state;
    std::vector<StepReport> reports;
};

/// Solves rows first_step..n, keeping rows below first_step of `state`
/// (which must already hold a solution for the same data up to that row).
inline void solve_rows(DiscreteState& state, std::vector<StepReport>& reports, int first_step,
                       const DiscreteControl& gd, const SteklovData& sd, const Grid& grid,
                       const MollifiedEnthalpy& bm, const SolverParams& params) {
    std::vector<double> b_prev(static_cast<std::size_t>(grid.m) + 1);
    for (int i = 0; i <= grid.m; ++i) b_prev[i] = bm(state(first_step - 1, i));
    reports.resize(static_cast<std::size_t>(first_step - 1));
    for (int k = first_step; k <= grid.n; ++k) {
        StepResult r;
        try {
            r = solve_step(state.row(k - 1), b_prev, k, sd, gd, grid, bm, params);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " [step " + std::to_string(k) + "]", k, e.last_update());
        }
        std::copy(r.row.begin(), r.row.end(), state.row(k).begin());
        b_prev = std::move(r.b);
        reports.push_back(std::move(r.report));
    }
}

inline SolveResult solve_all(const DiscreteControl& gd, const SteklovData& sd, const Grid& grid,
                             const MollifiedEnthalpy& bm, const SolverParams& params) {
    params.validate();
    check_control(gd, grid);
    if (sd.n() != grid.n || sd.m() != grid.m) throw PreconditionError("solve_all: Steklov data shape mismatch");
    SolveResult out{DiscreteState(grid.n, grid.m), {}};
    for (int i = 0; i <= grid.m; ++i) out.state(0, i) = sd.phi(i);
    solve_rows(out.state, out.reports, 1, gd, sd, grid, bm, params);
    return out;
}

/// Max over k >= 1 and unit test vectors of the summation-identity residual.
inline double residual_check(const DiscreteState& state, const SteklovData& sd, const DiscreteControl& gd,
                             const Grid& grid, const MollifiedEnthalpy& bm) {
    if (state.n() != grid.n || state.m() != grid.m) throw PreconditionError("residual_check: shape mismatch");
    const auto M = static_cast<std::size_t>(grid.m) + 1;
    std::vector<double> b_prev(M), b_cur(M), work(M);
    for (std::size_t i = 0; i < M; ++i) b_prev[i] = bm(state(0, static_cast<int>(i)));
    double worst = 0.0;
    for (int k = 1; k <= grid.n; ++k) {
        for (std::size_t i = 0; i < M; ++i) b_cur[i] = bm(state(k, static_cast<int>(i)));
        const detail::RowSystem sys = detail::make_row_system(k, b_prev, sd, gd, grid);
        worst = std::max(worst, detail::scaled_residual(sys, state.row(k), b_cur, work));
        b_prev.swap(b_cur);
    }
    return worst;
}

/// CSV with n + 1 rows of m + 1 columns and a header naming the columns.
inline void write_state_csv(const DiscreteState& s, const std::filesystem::path& path) {
    auto out = io::open_output(path);
    for (int i = 0; i <= s.m(); ++i) out << (i ? "," : "") << "v_" << i;
    out << '\n';
    for (int k = 0; k <= s.n(); ++k) {
        for (int i = 0; i <= s.m(); ++i) out << (i ? "," : "") << io::fmt(s(k, i));
        out << '\n';
    }
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(b.data(), 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

} // namespace detail

/// Binary dump: "STEF", u32 n, u32 m, u32 zero, then (n+1)(m+1) little-endian doubles row-major.
inline void write_state_binary(const DiscreteState& s, const std::filesystem::path& path) {
    auto out = io::open_output(path, true);
    out.write("STEF", 4);
    detail::put_u32(out, static_cast<std::uint32_t>(s.n()));
    detail::put_u32(out, static_cast<std::uint32_t>(s.m()));
    detail::put_u32(out, 0u);
    for (double x : s.values()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &x, sizeof bits);
        std::array<char, 8> b{};
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
        out.write(b.data(), 8);
    }
}

inline DiscreteState read_state_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open state dump " + path.string());
    std::array<unsigned char, 16> header{};
    if (!in.read(reinterpret_cast<char*>(header.data()), 16) || std::memcmp(header.data(), "STEF", 4) != 0)
        throw ConfigError("not a state dump: " + path.string());
    const auto n = static_cast<int>(detail::get_u32(header.data() + 4));
    const auto m = static_cast<int>(detail::get_u32(header.data() + 8));
    DiscreteState s(n, m);
    for (double& x : s.values()) {
        std::array<unsigned char, 8> b{};
        if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw ConfigError("truncated state dump " + path.string());
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        std::memcpy(&x, &bits, sizeof x);
    }
    return s;
}

} // namespace stefan
