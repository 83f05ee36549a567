// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "stefan/control.hpp"
#include "stefan/interpolants.hpp"
#include "stefan/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace stefan;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_s > 0.0 && s > limit_s) {
        o.passed = false;
        o.detail += "; runtime limit " + io::fmt(limit_s) + " s exceeded";
    }
    if (!o.passed) ++failures;
    std::printf("[%s] %2d %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

ScalarFunction cst(double v) { return ScalarFunction::constant(v); }

PhaseSpec two_phase(double gamma, double as, double ks, double al, double kl) {
    PhaseSpec p;
    p.critical_temps = {0.0};
    p.latent_heats = {gamma};
    p.alpha_pieces = {cst(as), cst(al)};
    p.k_pieces = {cst(ks), cst(kl)};
    return p;
}

PhaseSpec single_phase() {
    PhaseSpec p;
    p.alpha_pieces = {cst(1.0)};
    p.k_pieces = {cst(1.0)};
    return p;
}

NeumannConstants neumann_constants() {
    NeumannConstants c;
    c.k_solid = 2.0;
    c.initial_temp = -0.5;
    return c;
}

// Jacobi update ratios gathered across criteria for the contraction audit.
long jacobi_ratios = 0;
long jacobi_violations = 0;

void record_jacobi(const std::vector<StepReport>& reports) {
    for (const auto& r : reports) {
        jacobi_ratios += static_cast<long>(r.ratios().size());
        jacobi_violations += r.contraction_violations(1e-12);
    }
}

// Single-phase flux identification problem shared by criteria 10 and 11.
struct FluxProblem {
    ControlProblem problem;
    ScalarFunction g_true;
};

FluxProblem flux_problem(double R, int fine_n, int fine_m) {
    const double pi = std::numbers::pi;
    ScalarFunction g_true([pi](double t) { return -0.5 * std::sin(pi * t) - 0.2 * t; }, "g_true");
    ProblemData d{FieldFunction::constant(0.0), cst(0.0), cst(-0.2), cst(0.0)};
    ControlProblem p = ControlProblem::make(single_phase(), d, 1.0, 0.25, R);
    const DiscreteProblem fine = discretize(p, fine_n, fine_m);
    const SolveResult s = solve_all(average_control(g_true, fine.grid), fine.sd, fine.grid, fine.bm, fine.params);
    std::vector<double> t, v;
    for (int k = 0; k <= fine.grid.n; ++k) {
        t.push_back(fine.grid.t(k));
        v.push_back(s.state(k, fine.grid.m));
    }
    p.data.gamma = ScalarFunction(PiecewiseLinear(t, v));
    return {p, g_true};
}

Outcome constant_exactness() {
    double worst = 0.0;
    int solves = 0;
    const auto b = std::make_shared<const EnthalpyFunction>(two_phase(1.0, 1.0, 2.0, 3.0, 1.0));
    for (auto [n, m] : std::vector<std::pair<int, int>>{{1, 1}, {3, 5}, {16, 16}, {32, 128}, {128, 128}})
        for (double c : {-0.7, 0.4, 2.5})
            for (SolverMode mode : {SolverMode::jacobi, SolverMode::gauss_seidel, SolverMode::newton}) {
                const Grid g(n, m, 1.0, 1.0);
                const ProblemData d{FieldFunction::constant(0.0), cst(0.0), cst(c), cst(0.0)};
                const SteklovData sd = steklov_averages(d, g, 1.0);
                const MollifiedEnthalpy bm(b, 1.0 / n > std::abs(c) / 2 ? std::abs(c) / 2 : 1.0 / n);
                SolverParams params;
                params.mode = mode;
                const SolveResult r = solve_all(DiscreteControl::zeros(n), sd, g, bm, params);
                if (mode == SolverMode::jacobi) record_jacobi(r.reports);
                for (double v : r.state.values()) worst = std::max(worst, std::abs(v - c));
                ++solves;
            }
    return {worst <= 1e-12, "max deviation " + sci(worst) + " over " + std::to_string(solves) + " solves up to n=m=128"};
}

Outcome cross_mode() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto in = [&](double a, double b) { return a + (b - a) * U(rng); };
    double worst = 0.0;
    const double tol = SolverParams{}.tol;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 32, m = 32;
        const double T = in(0.01, 0.05);
        const Grid g(n, m, T, 1.0);
        const PhaseSpec spec = two_phase(in(0.5, 2.0), in(0.5, 2.0), in(0.5, 2.0), in(0.5, 2.0), in(0.5, 2.0));
        ProblemData d;
        d.f = FieldFunction::constant(in(-1.0, 1.0));
        d.p = cst(in(-1.0, 1.0));
        const double x0 = in(0.2, 0.8), slope = in(0.5, 2.0);
        d.phi = ScalarFunction(Polynomial::univariate({slope * x0, -slope}));
        d.gamma = cst(0.0);
        const SteklovData sd = steklov_averages(d, g, 1.0);
        const MollifiedEnthalpy bm(std::make_shared<const EnthalpyFunction>(spec), 1.0 / n);
        DiscreteControl gd = DiscreteControl::zeros(n);
        for (double& v : gd.g) v = in(-1.0, 1.0);
        SolverParams pj, pn;
        pj.mode = SolverMode::jacobi;
        pn.mode = SolverMode::newton;
        const SolveResult a = solve_all(gd, sd, g, bm, pj);
        const SolveResult b = solve_all(gd, sd, g, bm, pn);
        record_jacobi(a.reports);
        for (std::size_t j = 0; j < a.state.values().size(); ++j)
            worst = std::max(worst, std::abs(a.state.values()[j] - b.state.values()[j]));
    }
    return {worst <= 10 * tol, "max |jacobi - newton| " + sci(worst) + " (limit " + sci(10 * tol) + ") on 20 problems"};
}

Outcome neumann_jacobi_ratios() {
    BenchmarkSetup st = neumann_setup(NeumannBenchmark(neumann_constants()), 0.05, 0.02, 1.0, 1e3);
    st.problem.solver.mode = SolverMode::jacobi;
    for (auto [n, m] : std::vector<std::pair<int, int>>{{4, 16}, {8, 32}, {16, 64}}) {
        const DiscreteProblem dp = discretize(st.problem, n, m);
        record_jacobi(solve_all(average_control(st.g_true, dp.grid), dp.sd, dp.grid, dp.bm, dp.params).reports);
    }
    return {true, ""};
}

Outcome heat_orders() {
    const double T = 0.1, L = 1.0;
    const BenchmarkSetup st = heat_setup(T, L);
    const std::vector<std::pair<int, int>> levels{{16, 16}, {64, 32}, {256, 64}};
    std::vector<double> err;
    for (auto [n, m] : levels) {
        const DiscreteProblem dp = discretize(st.problem, n, m);
        const SolveResult r = solve_all(average_control(st.g_true, dp.grid), dp.sd, dp.grid, dp.bm, dp.params);
        double e = 0.0;
        for (int i = 0; i < m; ++i)
            e = std::max(e, std::abs(r.state(n, i) - st.cell_average(dp.grid.x(i), dp.grid.x(i + 1), T)));
        err.push_back(e);
    }
    bool ok = true;
    std::string detail = "errors";
    for (double e : err) detail += " " + sci(e);
    detail += "; spatial/temporal orders";
    for (std::size_t j = 1; j < err.size(); ++j) {
        const double ratio = err[j - 1] / err[j];
        const double hs = static_cast<double>(levels[j].second) / levels[j - 1].second;
        const double ts = static_cast<double>(levels[j].first) / levels[j - 1].first;
        const double ps = std::log(ratio) / std::log(hs), pt = std::log(ratio) / std::log(ts);
        if (!(ps >= 1.8 && pt >= 0.9)) ok = false;
        detail += " " + sci(ps) + "/" + sci(pt);
    }
    return {ok, detail};
}

StudyReport neumann_study() {
    const BenchmarkSetup st = neumann_setup(NeumannBenchmark(neumann_constants()), 0.05, 0.5, 1.0, 1e3);
    return refinement_study("neumann", st, {{32, 32}, {64, 64}, {128, 128}},
                            static_cast<int>(std::max(1u, std::min(3u, std::thread::hardware_concurrency()))));
}

Outcome audit_outcome(const StudyReport& rep, const std::vector<std::string>& names) {
    bool ok = true;
    std::string detail;
    for (const auto& n : names) {
        const Audit* a = rep.audit(n);
        if (!a) {
            ok = false;
            detail += n + " missing; ";
            continue;
        }
        ok = ok && a->passed;
        detail += n + " " + (a->passed ? "ok" : "FAILED") + " (" + a->detail + "); ";
    }
    return {ok, detail};
}

PiecewiseLinear random_pl(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(2, 60);
    std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
    std::vector<double> t{0.0, 1.0};
    for (int j = count(rng); j > 0; --j) t.push_back(P(rng));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<double> v(t.size());
    for (double& x : v) x = 2.0 * U(rng);
    return PiecewiseLinear(t, v);
}

Outcome mapping_inequalities() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> N(0.0, 1.0);
    int checks = 0, bad = 0;
    double worst = -INFINITY;
    for (int rep = 0; rep < 20; ++rep) {
        const PiecewiseLinear g = random_pl(rng);
        for (int n : {4, 16, 64}) {
            const Grid grid(n, 1, 1.0, 1.0);
            DiscreteControl gd = DiscreteControl::zeros(n);
            for (double& v : gd.g) v = N(rng);
            for (const InequalityCheck& c : {qn_inequality(g, grid), pn_inequality(gd, grid)}) {
                ++checks;
                if (!c.holds(1e-10)) ++bad;
                worst = std::max(worst, c.lhs - c.rhs);
            }
        }
    }
    return {bad == 0, std::to_string(bad) + " violations in " + std::to_string(checks) + " checks; max lhs - rhs " + sci(worst)};
}

Outcome functional_convergence() {
    const int workers = static_cast<int>(std::max(1u, std::min(3u, std::thread::hardware_concurrency())));
    std::string detail;
    bool ok = true;
    {
        const FluxProblem fp = flux_problem(10.0, 512, 128);
        const double pi = std::numbers::pi;
        const std::vector<ScalarFunction> controls{
            cst(0.0),
            fp.g_true,
            ScalarFunction(Polynomial::univariate({-0.1, -0.4})),
            ScalarFunction([pi](double t) { return 0.3 * std::cos(2 * pi * t); }, "cos"),
            ScalarFunction([](double t) { return -0.6 * std::abs(t - 0.5); }, "kink at T/2"),
        };
        int decreasing = 0;
        for (const auto& g : controls) {
            const FunctionalGapReport rep = functional_convergence_study(g, fp.problem, {8, 16, 32}, 4, workers);
            if (rep.strictly_decreasing) ++decreasing;
            else detail += "non-decreasing gaps " + sci(rep.gaps[0]) + "," + sci(rep.gaps[1]) + "," + sci(rep.gaps[2]) + "; ";
        }
        ok = decreasing == 5;
        detail += std::to_string(decreasing) + "/5 controls with strictly decreasing gaps; ";
    }
    {
        const FluxProblem fp = flux_problem(0.5, 512, 128);
        std::vector<double> best;
        DiscreteControl prev;
        Grid prev_grid;
        for (int n : {8, 16, 32, 64}) {
            const DiscreteProblem dp = discretize(fp.problem, n, n);
            OptimizerParams op;
            op.min_step = 1e-5;
            DiscreteControl init = DiscreteControl::zeros(n);
            if (!best.empty()) {
                // Warm start from the previous level's optimum.
                init = average_control(ScalarFunction(pn_map(prev, prev_grid)), dp.grid);
                init[0] = 0.0;
                op.initial_step = 0.02;
                op.max_evals = 60000;
            } else {
                op.max_evals = 400000;
            }
            const OptimizationTrace tr = minimize(init, dp, op);
            best.push_back(tr.best_value);
            prev = tr.best;
            prev_grid = dp.grid;
        }
        detail += "I_n* =";
        for (double b : best) detail += " " + sci(b);
        detail += ", gaps";
        double last_gap = INFINITY;
        for (std::size_t j = 1; j < best.size(); ++j) {
            const double gap = std::abs(best[j] - best[j - 1]);
            detail += " " + sci(gap);
            if (!(gap < last_gap)) ok = false;
            last_gap = gap;
        }
    }
    return {ok, detail};
}

Outcome flux_recovery() {
    const int n = 32;
    const FluxProblem fp = flux_problem(10.0, 4 * n, 4 * n);
    const DiscreteProblem dp = discretize(fp.problem, n, n);
    const DiscreteControl target = average_control(fp.g_true, dp.grid);
    const double I0 = evaluate_control(DiscreteControl::zeros(n), dp).value;
    OptimizerParams op;
    op.max_evals = 200000;
    op.min_step = 1e-7;
    const OptimizationTrace tr = minimize(DiscreteControl::zeros(n), dp, op);
    double num = 0.0, den = 0.0;
    for (int k = 1; k <= n; ++k) {
        num += std::pow(tr.best[k] - target[k], 2);
        den += target[k] * target[k];
    }
    const double rel = std::sqrt(num / den);
    const double ratio = tr.best_value / I0;
    return {ratio <= 1e-4 && rel <= 0.1, "I_n/I_n(0) " + sci(ratio) + ", relative L2 error " + sci(rel) + " after " +
                                             std::to_string(tr.records.size()) + " evaluations"};
}

Outcome identities() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 30), m = 2 + static_cast<int>(rng() % 30);
        const Grid g(n, m, 0.1 + std::abs(U(rng)), 0.5 + std::abs(U(rng)));
        DiscreteState s(n, m);
        for (double& v : s.values()) v = U(rng);
        for (const L2Identity& id : {vtau_hat_identity(s, g), vtilde_vtau_identity(s, g)})
            worst = std::max(worst, std::abs(id.quadrature - id.closed_form) / std::abs(id.closed_form));
    }
    return {worst <= 1e-12, "max relative difference " + sci(worst) + " on 20 random states"};
}

} // namespace

int main() {
    report(1, "constant-solution exactness", 1.0, constant_exactness);
    report(3, "jacobi/newton agreement", 0.0, cross_mode);
    report(2, "contraction bound", 0.0, [] {
        neumann_jacobi_ratios();
        return Outcome{jacobi_ratios >= 10000 && jacobi_violations == 0,
                       std::to_string(jacobi_violations) + " violations in " + std::to_string(jacobi_ratios) +
                           " recorded jacobi ratios"};
    });
    report(4, "heat-regime orders", 30.0, heat_orders);
    StudyReport study;
    report(5, "Neumann front and error", 120.0, [&] {
        study = neumann_study();
        return audit_outcome(study, {"front_accuracy", "front_error_decreasing", "error_decreasing"});
    });
    report(6, "l_inf growth", 0.0, [&] { return audit_outcome(study, {"linf_growth"}); });
    report(7, "energy band", 0.0, [&] { return audit_outcome(study, {"energy_band"}); });
    report(8, "weak residual decay", 0.0, [&] { return audit_outcome(study, {"weak_residual_decay"}); });
    report(9, "mapping inequalities", 0.0, mapping_inequalities);
    report(10, "functional convergence", 600.0, functional_convergence);
    report(11, "flux recovery", 600.0, flux_recovery);
    report(12, "interpolant identities", 0.0, identities);
    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
