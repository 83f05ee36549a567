#pragma once

// Exact-solution oracles (two-phase Neumann similarity solution, separable
// heat solution), level-set front extraction, control-map inequality checks
// and refinement / functional convergence studies.

#include "stefan/control.hpp"
#include "stefan/discretization.hpp"
#include "stefan/error.hpp"
#include "stefan/interpolants.hpp"
#include "stefan/io.hpp"
#include "stefan/physics.hpp"
#include "stefan/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace stefan {

/// Runs body(0..count-1) on up to `workers` threads; rethrows the first exception.
inline void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Two-phase Neumann solution: liquid (hot) occupies 0 < x < xi(s), solid
// beyond, melting temperature 0, xi(s) = 2 lambda sqrt(a_L s).

struct NeumannConstants {
    double alpha_liquid = 1.0;  ///< volumetric heat capacity
    double k_liquid = 1.0;      ///< conductivity
    double alpha_solid = 1.0;
    double k_solid = 1.0;
    double latent_heat = 1.0;
    double surface_temp = 1.0;  ///< u(0, s) > 0
    double initial_temp = 0.0;  ///< far-field solid temperature, <= 0
};

class NeumannBenchmark {
public:
    explicit NeumannBenchmark(const NeumannConstants& c) : c_(c) {
        if (!(c.alpha_liquid > 0 && c.k_liquid > 0 && c.alpha_solid > 0 && c.k_solid > 0 && c.latent_heat > 0))
            throw ConfigError("Neumann benchmark: material constants must be positive");
        if (!(c.surface_temp > 0.0) || c.initial_temp > 0.0)
            throw ConfigError("Neumann benchmark: need surface_temp > 0 >= initial_temp");
        a_l_ = c.k_liquid / c.alpha_liquid;
        a_s_ = c.k_solid / c.alpha_solid;
        v0_ = c.k_liquid * c.surface_temp;
        vinf_ = c.k_solid * c.initial_temp;
        lambda_ = solve_root();
    }

    const NeumannConstants& constants() const { return c_; }
    double lambda() const { return lambda_; }
    double mu() const { return lambda_ * std::sqrt(a_l_ / a_s_); }
    double diffusivity_liquid() const { return a_l_; }
    double diffusivity_solid() const { return a_s_; }
    double surface_value() const { return v0_; }
    double far_value() const { return vinf_; }

    /// Heat balance at the front divided by sqrt(s); zero at the similarity root.
    double balance_residual(double lam) const {
        const double mu = lam * std::sqrt(a_l_ / a_s_);
        double solid = 0.0;
        if (vinf_ != 0.0) solid = vinf_ * std::exp(-mu * mu) / (std::erfc(mu) * std::sqrt(a_s_));
        return v0_ * std::exp(-lam * lam) / (std::erf(lam) * std::sqrt(a_l_)) + solid -
               c_.latent_heat * lam * std::sqrt(std::numbers::pi * a_l_);
    }

    /// Classical one-phase root: lambda e^{lambda^2} erf(lambda) = Ste / sqrt(pi).
    static double one_phase_root(double stefan_number) {
        auto f = [&](double l) { return l * std::exp(l * l) * std::erf(l) - stefan_number / std::sqrt(std::numbers::pi); };
        return bisect(f, 1e-300, 10.0);
    }

    double front(double s) const { return s <= 0.0 ? 0.0 : 2.0 * lambda_ * std::sqrt(a_l_ * s); }

    double v(double x, double s) const {
        if (s <= 0.0) return x <= 0.0 ? v0_ : vinf_;
        if (x <= front(s)) return v0_ * (1.0 - std::erf(x / (2.0 * std::sqrt(a_l_ * s))) / std::erf(lambda_));
        return vinf_ * (1.0 - std::erfc(x / (2.0 * std::sqrt(a_s_ * s))) / std::erfc(mu()));
    }

    double v_x(double x, double s) const {
        const double pi = std::numbers::pi;
        if (x <= front(s)) {
            const double z = x / (2.0 * std::sqrt(a_l_ * s));
            return -v0_ * std::exp(-z * z) / (std::sqrt(pi * a_l_ * s) * std::erf(lambda_));
        }
        const double z = x / (2.0 * std::sqrt(a_s_ * s));
        return vinf_ * std::exp(-z * z) / (std::sqrt(pi * a_s_ * s) * std::erfc(mu()));
    }

    /// Temperature u = F^{-1}(v).
    double u(double x, double s) const {
        const double val = v(x, s);
        return val >= 0.0 ? val / c_.k_liquid : val / c_.k_solid;
    }

    /// Exact integral of v(., s) over [x0, x1].
    double integral(double x0, double x1, double s) const {
        const double pi = std::numbers::pi;
        const double xi = front(s);
        auto liquid = [&](double x) {
            const double cl = 2.0 * std::sqrt(a_l_ * s);
            const double z = x / cl;
            return v0_ * (x - cl * (z * std::erf(z) + std::exp(-z * z) / std::sqrt(pi)) / std::erf(lambda_));
        };
        auto solid = [&](double x) {
            const double cs = 2.0 * std::sqrt(a_s_ * s);
            const double z = x / cs;
            return vinf_ * (x - cs * (z * std::erfc(z) - std::exp(-z * z) / std::sqrt(pi)) / std::erfc(mu()));
        };
        double total = 0.0;
        const double a = std::min(x0, xi), b = std::min(x1, xi);
        if (b > a) total += liquid(b) - liquid(a);
        const double c = std::max(x0, xi), d = std::max(x1, xi);
        if (d > c) total += solid(d) - solid(c);
        return total;
    }

    /// Material with melting temperature 0 (segment 0 solid, segment 1 liquid).
    PhaseSpec phase_spec() const {
        PhaseSpec p;
        p.critical_temps = {0.0};
        p.latent_heats = {c_.latent_heat};
        p.alpha_pieces = {ScalarFunction::constant(c_.alpha_solid), ScalarFunction::constant(c_.alpha_liquid)};
        p.k_pieces = {ScalarFunction::constant(c_.k_solid), ScalarFunction::constant(c_.k_liquid)};
        p.bbar = std::min(1.0 / a_l_, 1.0 / a_s_);
        return p;
    }

private:
    template <class F>
    static double bisect(F&& f, double lo, double hi) {
        // f(lo) and f(hi) must have opposite signs.
        const bool lo_neg = f(lo) < 0.0;
        for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if ((f(mid) < 0.0) == lo_neg) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    double solve_root() const {
        double hi = 1.0;
        while (balance_residual(hi) > 0.0) {
            hi *= 2.0;
            if (hi > 1e3) throw ConfigError("Neumann benchmark: similarity root not bracketed");
        }
        return bisect([&](double l) { return balance_residual(l); }, 1e-300, hi);
    }

    NeumannConstants c_;
    double a_l_, a_s_, v0_, vinf_, lambda_;
};

/// Problem data and exact evaluators in problem time t (similarity time s = t + t0).
struct BenchmarkSetup {
    ControlProblem problem;
    ScalarFunction g_true;
    std::function<double(double, double)> exact;              ///< v(x, t)
    std::function<double(double, double, double)> cell_average;  ///< mean of v(., t) over [x0, x1]
    std::function<double(double)> front;                       ///< level-set position, empty when absent
    double front_level = 0.0;
};

/// Truncated-domain Neumann problem on (0, L) x (0, T). Boundary data and the
/// measurement come from the exact solution; t0 > 0 keeps the data smooth.
inline BenchmarkSetup neumann_setup(const NeumannBenchmark& nb, double t0, double T, double L, double R) {
    if (!(t0 > 0.0) || !(T > 0.0) || !(L > 0.0)) throw ConfigError("Neumann setup: t0, T and L must be positive");
    if (nb.front(T + t0) >= L)
        throw ConfigError("Neumann setup: the front reaches x = L (xi = " + io::fmt(nb.front(T + t0)) + ") before T");
    ProblemData d;
    d.f = FieldFunction::constant(0.0);
    d.phi = ScalarFunction([nb, t0](double x) { return nb.v(x, t0); },
                           [nb, t0](double x) { return nb.integral(0.0, x, t0); }, "neumann initial profile");
    d.p = ScalarFunction([nb, t0, L](double t) { return nb.v_x(L, t + t0); }, "neumann right flux");
    d.gamma = ScalarFunction([nb, t0, L](double t) { return nb.v(L, t + t0); }, "neumann right trace");
    BenchmarkSetup s{ControlProblem::make(nb.phase_spec(), d, T, L, R),
                     ScalarFunction([nb, t0](double t) { return nb.v_x(0.0, t + t0); }, "neumann left flux"),
                     [nb, t0](double x, double t) { return nb.v(x, t + t0); },
                     [nb, t0](double x0, double x1, double t) { return nb.integral(x0, x1, t + t0) / (x1 - x0); },
                     [nb, t0](double t) { return nb.front(t + t0); },
                     0.0};
    return s;
}

/// b(v) = v, Phi = amplitude cos(pi x / L), zero fluxes and source:
/// v = amplitude exp(-(pi/L)^2 t) cos(pi x / L).
inline BenchmarkSetup heat_setup(double T, double L, double amplitude = 1.0, double R = 10.0) {
    const double pi = std::numbers::pi;
    const double w = pi / L;
    PhaseSpec p;
    p.alpha_pieces = {ScalarFunction::constant(1.0)};
    p.k_pieces = {ScalarFunction::constant(1.0)};
    p.bbar = 1.0;
    ProblemData d;
    d.phi = ScalarFunction([=](double x) { return amplitude * std::cos(w * x); },
                           [=](double x) { return amplitude * std::sin(w * x) / w; }, "cosine profile");
    ScalarFunction zero = ScalarFunction::constant(0.0);
    d.p = zero;
    d.gamma = ScalarFunction([=](double t) { return -amplitude * std::exp(-w * w * t); }, "heat right trace");
    BenchmarkSetup s{ControlProblem::make(p, d, T, L, R), zero,
                     [=](double x, double t) { return amplitude * std::exp(-w * w * t) * std::cos(w * x); },
                     [=](double x0, double x1, double t) {
                         return amplitude * std::exp(-w * w * t) * (std::sin(w * x1) - std::sin(w * x0)) /
                                (w * (x1 - x0));
                     },
                     {}, 0.0};
    return s;
}

/// For each k, the first crossing from the left of level by the piecewise-linear
/// profile of row k; absent when the row does not reach the level.
inline std::vector<std::optional<double>> extract_front(const DiscreteState& s, const Grid& grid, double level) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(grid.n) + 1);
    for (int k = 0; k <= grid.n; ++k) {
        for (int i = 0; i < grid.m; ++i) {
            const double a = s(k, i) - level;
            const double b = s(k, i + 1) - level;
            if (a == 0.0) {
                out[k] = grid.x(i);
                break;
            }
            if ((a < 0.0) != (b < 0.0) || b == 0.0) {
                out[k] = grid.x(i) + grid.h() * a / (a - b);
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Norm inequalities of the control maps.

struct InequalityCheck {
    double lhs;
    double rhs;
    bool holds(double slack = 1e-10) const { return lhs <= rhs + slack; }
};

/// Integral of g'^2 over [a, b] for a piecewise-linear g.
inline double derivative_l2_squared(const PiecewiseLinear& g, double a, double b) {
    double s = 0.0;
    for (std::size_t j = 1; j < g.knots.size(); ++j) {
        const double lo = std::max(a, g.knots[j - 1]);
        const double hi = std::min(b, g.knots[j]);
        if (hi <= lo) continue;
        const double slope = (g.values[j] - g.values[j - 1]) / (g.knots[j] - g.knots[j - 1]);
        s += slope * slope * (hi - lo);
    }
    return s;
}

/// ||Q_n g||_{w21}^2 <= ||g||_{W21}^2 + ||g'||_{L2(0, tau)}^2
inline InequalityCheck qn_inequality(const PiecewiseLinear& g, const Grid& grid) {
    const DiscreteControl gd = average_control(ScalarFunction(g), grid);
    const double lhs = std::pow(w21_discrete_norm(gd, grid), 2);
    const double rhs = std::pow(w21_continuous_norm(g), 2) + derivative_l2_squared(g, 0.0, grid.tau());
    return {lhs, rhs};
}

/// ||P_n g||_{W21}^2 <= ||g||_{w21}^2 + C sqrt(T tau) sqrt(sum tau g_k^2) + tau^2/3 sum tau g_{k tbar}^2,
/// with C = max_k |g_k - g_{k-1}| / sqrt(tau), the smallest admissible constant.
inline InequalityCheck pn_inequality(const DiscreteControl& gd, const Grid& grid) {
    const double tau = grid.tau();
    double l2 = 0.0, d2 = 0.0, C = 0.0;
    for (int k = 1; k <= grid.n; ++k) {
        const double dk = gd[k] - gd[k - 1];
        l2 += tau * gd[k] * gd[k];
        d2 += dk * dk / tau;
        C = std::max(C, std::abs(dk) / std::sqrt(tau));
    }
    const double lhs = std::pow(w21_continuous_norm(pn_map(gd, grid)), 2);
    const double rhs = l2 + d2 + C * std::sqrt(grid.T * tau) * std::sqrt(l2) + tau * tau / 3.0 * d2;
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Studies.

struct StudyLevel {
    int n = 0, m = 0;
    double h = 0.0, tau = 0.0;
    double linf = 0.0;
    double energy = 0.0;
    std::optional<double> error;        ///< max over cells of |v_i(n) - exact cell mean| at t = T
    std::optional<double> front_error;  ///< max over k >= 1 of |front_num - front_exact|
    std::vector<double> weak_residuals;
    long iterations = 0;
    long recorded_ratios = 0;
    long contraction_violations = 0;
    double max_ratio = 0.0;
    double delta = 0.0;
    double residual = 0.0;  ///< summation-identity residual
    double seconds = 0.0;
};

struct Audit {
    std::string name;
    bool passed;
    std::string detail;
};

struct StudyReport {
    std::string name;
    SolverMode mode = SolverMode::newton;
    std::vector<std::string> test_functions;
    std::vector<StudyLevel> levels;
    std::vector<double> error_orders;  ///< log2 of successive error ratios
    std::vector<Audit> audits;

    bool passed() const {
        return std::all_of(audits.begin(), audits.end(), [](const Audit& a) { return a.passed; });
    }
    const Audit* audit(const std::string& name) const {
        for (const auto& a : audits)
            if (a.name == name) return &a;
        return nullptr;
    }
};

inline StudyLevel study_level(const BenchmarkSetup& setup, int n, int m, const std::vector<TestFunction>& psis) {
    const auto start = std::chrono::steady_clock::now();
    const ControlProblem& p = setup.problem;
    const DiscreteProblem dp = discretize(p, n, m);
    const DiscreteControl gd = average_control(setup.g_true, dp.grid);
    const SolveResult sol = solve_all(gd, dp.sd, dp.grid, dp.bm, dp.params);
    const Grid& g = dp.grid;

    StudyLevel lv;
    lv.n = n;
    lv.m = m;
    lv.h = g.h();
    lv.tau = g.tau();
    lv.linf = linf_norm(sol.state);
    lv.energy = energy_norm(sol.state, g);
    lv.delta = contraction_factor(g, dp.bm.bbar());
    lv.residual = residual_check(sol.state, dp.sd, gd, g, dp.bm);
    for (const auto& r : sol.reports) {
        lv.iterations += r.iterations;
        lv.contraction_violations += r.contraction_violations();
        for (double q : r.ratios()) {
            ++lv.recorded_ratios;
            lv.max_ratio = std::max(lv.max_ratio, q);
        }
    }
    if (setup.cell_average) {
        double err = 0.0;
        for (int i = 0; i < g.m; ++i)
            err = std::max(err, std::abs(sol.state(g.n, i) - setup.cell_average(g.x(i), g.x(i + 1), g.T)));
        lv.error = err;
    }
    if (setup.front) {
        const auto fronts = extract_front(sol.state, g, setup.front_level);
        double err = 0.0;
        for (int k = 1; k <= g.n; ++k) {
            const double exact = setup.front(g.t(k));
            err = std::max(err, fronts[k] ? std::abs(*fronts[k] - exact) : std::numeric_limits<double>::infinity());
        }
        lv.front_error = err;
    }
    for (const auto& psi : psis)
        lv.weak_residuals.push_back(std::abs(weak_residual(sol.state, g, psi, dp.bm, p.data, setup.g_true)));
    lv.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return lv;
}

/// Solves every level of the family and audits the discrete estimates:
///   - l_inf norm grows by at most 5% over the coarsest level and between neighbours;
///   - energy norm stays within a factor 1.5 of the coarsest level;
///   - weak residual drops by >= 2 whenever both n and m grow 4x;
///   - oracle error and front error decrease; front error <= 5h once n, m >= 128;
///   - in jacobi mode, every update ratio respects the contraction bound.
inline StudyReport refinement_study(const std::string& name, const BenchmarkSetup& setup,
                                    const std::vector<std::pair<int, int>>& family, int workers = 1) {
    if (family.size() < 3) throw PreconditionError("refinement study needs at least 3 grid levels");
    StudyReport rep;
    rep.name = name;
    rep.mode = setup.problem.solver.mode;
    const auto psis = test_function_library(setup.problem.T, setup.problem.L);
    for (const auto& psi : psis) rep.test_functions.push_back(psi.name);
    rep.levels.resize(family.size());
    parallel_for(static_cast<int>(family.size()), workers, [&](int j) {
        rep.levels[j] = study_level(setup, family[j].first, family[j].second, psis);
    });

    const auto& lv = rep.levels;
    auto fmt = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", x);
        return std::string(buf);
    };
    {
        bool ok = true;
        double worst = 0.0;
        for (std::size_t j = 1; j < lv.size(); ++j) {
            const double base = std::max(lv[0].linf, 1e-300);
            worst = std::max(worst, lv[j].linf / base);
            if (lv[j].linf > 1.05 * lv[0].linf + 1e-14 || lv[j].linf > 1.05 * lv[j - 1].linf + 1e-14) ok = false;
        }
        rep.audits.push_back({"linf_growth", ok, "max ratio to coarsest " + fmt(worst)});
    }
    {
        bool ok = true;
        double lo = 1.0, hi = 1.0;
        for (std::size_t j = 1; j < lv.size(); ++j) {
            const double r = lv[0].energy > 0.0 ? lv[j].energy / lv[0].energy : (lv[j].energy > 0.0 ? INFINITY : 1.0);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            if (r > 1.5 || r < 1.0 / 1.5) ok = false;
        }
        rep.audits.push_back({"energy_band", ok, "ratio to coarsest in [" + fmt(lo) + ", " + fmt(hi) + "]"});
    }
    {
        bool any = false, ok = true;
        std::string detail;
        for (std::size_t a = 0; a < lv.size(); ++a)
            for (std::size_t b = a + 1; b < lv.size(); ++b) {
                if (lv[b].n != 4 * lv[a].n || lv[b].m != 4 * lv[a].m) continue;
                any = true;
                for (std::size_t q = 0; q < psis.size(); ++q) {
                    const double ra = lv[a].weak_residuals[q];
                    const double rb = lv[b].weak_residuals[q];
                    const bool pass = rb * 2.0 <= ra || ra <= 1e-13;
                    if (!pass) ok = false;
                    detail += psis[q].name + " " + fmt(ra) + "->" + fmt(rb) + "; ";
                }
            }
        if (any) rep.audits.push_back({"weak_residual_decay", ok, detail});
    }
    if (lv[0].error) {
        bool ok = true;
        for (std::size_t j = 1; j < lv.size(); ++j) {
            if (!(*lv[j].error < *lv[j - 1].error)) ok = false;
            rep.error_orders.push_back(std::log2(*lv[j - 1].error / *lv[j].error));
        }
        rep.audits.push_back({"error_decreasing", ok, "final error " + fmt(*lv.back().error)});
    }
    if (lv[0].front_error) {
        bool ok = true;
        for (std::size_t j = 1; j < lv.size(); ++j)
            if (!(*lv[j].front_error < *lv[j - 1].front_error)) ok = false;
        rep.audits.push_back({"front_error_decreasing", ok, "finest " + fmt(*lv.back().front_error)});
        bool fine_any = false, fine_ok = true;
        std::string detail;
        for (const auto& l : lv)
            if (l.n >= 128 && l.m >= 128) {
                fine_any = true;
                if (*l.front_error > 5.0 * l.h) fine_ok = false;
                detail += "n=" + std::to_string(l.n) + ": " + fmt(*l.front_error / l.h) + "h; ";
            }
        if (fine_any) rep.audits.push_back({"front_accuracy", fine_ok, detail});
    }
    if (rep.mode == SolverMode::jacobi) {
        long bad = 0, total = 0;
        for (const auto& l : lv) {
            bad += l.contraction_violations;
            total += l.recorded_ratios;
        }
        rep.audits.push_back({"contraction", bad == 0,
                              std::to_string(bad) + " violations in " + std::to_string(total) + " ratios"});
    }
    return rep;
}

inline void write_study_csv(const StudyReport& rep, const std::filesystem::path& path) {
    auto out = io::open_output(path);
    out << "n,m,h,tau,linf,energy,error,front_error";
    for (const auto& t : rep.test_functions) out << ",weak[" << t << "]";
    out << ",iterations,contraction_violations,max_ratio,delta,residual,seconds\n";
    auto opt = [](const std::optional<double>& x) { return x ? io::fmt(*x) : std::string(); };
    for (const auto& l : rep.levels) {
        out << l.n << ',' << l.m << ',' << io::fmt(l.h) << ',' << io::fmt(l.tau) << ',' << io::fmt(l.linf) << ','
            << io::fmt(l.energy) << ',' << opt(l.error) << ',' << opt(l.front_error);
        for (double w : l.weak_residuals) out << ',' << io::fmt(w);
        out << ',' << l.iterations << ',' << l.contraction_violations << ',' << io::fmt(l.max_ratio) << ','
            << io::fmt(l.delta) << ',' << io::fmt(l.residual) << ',' << io::fmt(l.seconds) << '\n';
    }
}

inline std::string study_summary(const StudyReport& rep) {
    std::ostringstream s;
    s << "study " << rep.name << " (" << to_string(rep.mode) << ", " << rep.levels.size() << " levels)\n";
    for (const auto& l : rep.levels) {
        s << "  n=" << l.n << " m=" << l.m << "  linf=" << io::fmt(l.linf) << "  energy=" << io::fmt(l.energy);
        if (l.error) s << "  error=" << io::fmt(*l.error);
        if (l.front_error) s << "  front_error=" << io::fmt(*l.front_error);
        s << '\n';
    }
    if (!rep.error_orders.empty()) {
        s << "  orders:";
        for (double o : rep.error_orders) s << ' ' << io::fmt(o);
        s << '\n';
    }
    for (const auto& a : rep.audits) s << "  [" << (a.passed ? "PASS" : "FAIL") << "] " << a.name << ": " << a.detail << '\n';
    return s.str();
}

struct FunctionalGapReport {
    std::vector<int> ns;
    std::vector<double> In;         ///< I_n(Q_n g)
    std::vector<double> surrogate;  ///< surrogate_J(g) at refinement r
    std::vector<double> gaps;
    bool strictly_decreasing = false;
};

/// Gaps |I_n(Q_n g) - surrogate_J(g)| with m = n.
inline FunctionalGapReport functional_convergence_study(const ScalarFunction& g, const ControlProblem& p,
                                                        const std::vector<int>& ns, int r = 4, int workers = 1) {
    if (ns.size() < 3) throw PreconditionError("functional convergence study needs at least 3 values of n");
    FunctionalGapReport rep;
    rep.ns = ns;
    rep.In.resize(ns.size());
    rep.surrogate.resize(ns.size());
    parallel_for(static_cast<int>(ns.size()), workers, [&](int j) {
        const DiscreteProblem dp = discretize(p, ns[j], ns[j]);
        const DiscreteControl gd = average_control(g, dp.grid);
        const SolveResult s = solve_all(gd, dp.sd, dp.grid, dp.bm, dp.params);
        rep.In[j] = cost_In(s.state, dp.sd, dp.grid);
        rep.surrogate[j] = surrogate_J(g, p, ns[j], ns[j], r);
    });
    rep.strictly_decreasing = true;
    for (std::size_t j = 0; j < ns.size(); ++j) {
        rep.gaps.push_back(std::abs(rep.In[j] - rep.surrogate[j]));
        if (j > 0 && !(rep.gaps[j] < rep.gaps[j - 1])) rep.strictly_decreasing = false;
    }
    return rep;
}

inline void write_gap_csv(const FunctionalGapReport& rep, const std::filesystem::path& path) {
    auto out = io::open_output(path);
    out << "n,I_n,surrogate_J,gap\n";
    for (std::size_t j = 0; j < rep.ns.size(); ++j)
        out << rep.ns[j] << ',' << io::fmt(rep.In[j]) << ',' << io::fmt(rep.surrogate[j]) << ',' << io::fmt(rep.gaps[j])
            << '\n';
}

} // namespace stefan
