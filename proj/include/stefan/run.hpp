#pragma once

// Dispatch of a validated configuration to solve / optimize / verify runs and
// the files each run writes.

#include "stefan/config.hpp"
#include "stefan/control.hpp"
#include "stefan/discretization.hpp"
#include "stefan/error.hpp"
#include "stefan/interpolants.hpp"
#include "stefan/io.hpp"
#include "stefan/solver.hpp"
#include "stefan/verification.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace stefan {

namespace detail {

/// Flat JSON object with numbers printed to 17 significant digits.
class JsonWriter {
public:
    void number(const std::string& key, double v) { add(key, std::isfinite(v) ? io::fmt(v) : "null"); }
    void integer(const std::string& key, long long v) { add(key, std::to_string(v)); }
    void boolean(const std::string& key, bool v) { add(key, v ? "true" : "false"); }
    void text(const std::string& key, const std::string& v) { add(key, nlohmann::json(v).dump()); }

    void write(const std::filesystem::path& path) const {
        auto out = io::open_output(path);
        out << "{\n";
        for (std::size_t i = 0; i < fields_.size(); ++i)
            out << "  " << nlohmann::json(fields_[i].first).dump() << ": " << fields_[i].second
                << (i + 1 < fields_.size() ? ",\n" : "\n");
        out << "}\n";
    }

private:
    void add(const std::string& k, std::string v) { fields_.emplace_back(k, std::move(v)); }
    std::vector<std::pair<std::string, std::string>> fields_;
};

inline ControlProblem make_control_problem(const RunConfig& cfg) {
    ControlProblem p = ControlProblem::make(cfg.material, cfg.data, cfg.T, cfg.L, cfg.R);
    p.epsilon = cfg.epsilon;
    p.solver = cfg.solver;
    return p;
}

inline void write_state(const DiscreteState& s, const OutputConfig& out, const std::string& stem) {
    if (out.csv) write_state_csv(s, out.directory / (stem + ".csv"));
    if (out.binary) write_state_binary(s, out.directory / (stem + ".bin"));
}

inline void write_lattice(const DiscreteState& s, const Grid& g, const LatticeConfig& lc,
                          const std::filesystem::path& path) {
    const Interpolant interp(lc.kind, s, g);
    auto out = io::open_output(path);
    out << "x,t,value\n";
    for (int a = 0; a < lc.nt; ++a) {
        const double t = a == lc.nt - 1 ? g.T : g.T * a / (lc.nt - 1);
        for (int b = 0; b < lc.nx; ++b) {
            const double x = b == lc.nx - 1 ? g.L : g.L * b / (lc.nx - 1);
            out << io::fmt(x) << ',' << io::fmt(t) << ',' << io::fmt(interp(x, t)) << '\n';
        }
    }
}

inline void write_fronts(const DiscreteState& s, const Grid& g, const std::vector<double>& levels,
                         const std::filesystem::path& path) {
    auto out = io::open_output(path);
    out << "k,t_k";
    for (std::size_t j = 0; j < levels.size(); ++j) out << ",front_" << j + 1;
    out << '\n';
    std::vector<std::vector<std::optional<double>>> fronts;
    for (double lv : levels) fronts.push_back(extract_front(s, g, lv));
    for (int k = 0; k <= g.n; ++k) {
        out << k << ',' << io::fmt(g.t(k));
        for (const auto& f : fronts) out << ',' << (f[k] ? io::fmt(*f[k]) : std::string());
        out << '\n';
    }
}

inline int run_solve(const RunConfig& cfg) {
    const ControlProblem p = make_control_problem(cfg);
    const DiscreteProblem dp = discretize(p, cfg.n, cfg.m);
    const DiscreteControl gd = qn_map(cfg.control, dp.grid);
    const SolveResult sol = solve_all(gd, dp.sd, dp.grid, dp.bm, dp.params);
    const auto& out = cfg.output;
    write_state(sol.state, out, "state");
    write_steklov_csv(dp.sd, out.directory / "data");
    write_control_csv(gd, dp.grid, out.directory / "control.csv");
    if (!p.enthalpy->phase_values().empty())
        write_fronts(sol.state, dp.grid, p.enthalpy->phase_values(), out.directory / "fronts.csv");
    if (out.lattice) write_lattice(sol.state, dp.grid, *out.lattice, out.directory / "interpolant.csv");

    long iterations = 0;
    for (const auto& r : sol.reports) iterations += r.iterations;
    const EnergyTerms e = energy_terms(sol.state, dp.grid);
    JsonWriter j;
    j.integer("n", dp.grid.n);
    j.integer("m", dp.grid.m);
    j.number("epsilon", dp.bm.epsilon());
    j.text("solver_mode", to_string(dp.params.mode));
    j.number("linf", linf_norm(sol.state));
    j.number("energy", e.norm());
    j.number("energy_time_derivative", e.time_derivative);
    j.number("energy_max_gradient", e.max_gradient);
    j.number("energy_mixed", e.mixed);
    j.number("residual", residual_check(sol.state, dp.sd, gd, dp.grid, dp.bm));
    j.number("control_norm", w21_discrete_norm(gd, dp.grid));
    j.number("delta", contraction_factor(dp.grid, dp.bm.bbar()));
    j.integer("iterations", iterations);
    if (cfg.has_gamma) j.number("I_n", cost_In(sol.state, dp.sd, dp.grid));
    j.write(out.directory / "norms.json");
    return 0;
}

inline int run_optimize(const RunConfig& cfg) {
    const ControlProblem p = make_control_problem(cfg);
    const DiscreteProblem dp = discretize(p, cfg.n, cfg.m);
    const DiscreteControl initial =
        cfg.initial_control ? DiscreteControl(*cfg.initial_control) : DiscreteControl::zeros(dp.grid.n);
    const double I0 = cost_In(solve_all(initial, dp.sd, dp.grid, dp.bm, dp.params).state, dp.sd, dp.grid);
    const OptimizationTrace trace = minimize(initial, dp, cfg.optimizer);
    const SolveResult best = solve_all(trace.best, dp.sd, dp.grid, dp.bm, dp.params);
    const auto& out = cfg.output;
    write_trace_csv(trace, out.directory / "trace.csv");
    write_control_csv(trace.best, dp.grid, out.directory / "control.csv");
    write_state(best.state, out, "state");
    JsonWriter j;
    j.integer("n", dp.grid.n);
    j.integer("m", dp.grid.m);
    j.number("R", cfg.R);
    j.number("I_n_initial", I0);
    j.number("I_n_best", trace.best_value);
    j.number("control_norm", w21_discrete_norm(trace.best, dp.grid));
    j.integer("evaluations", static_cast<long long>(trace.records.size()));
    j.number("final_step", trace.final_step);
    j.boolean("step_converged", trace.step_converged);
    j.integer("seed", static_cast<long long>(cfg.optimizer.seed));
    j.write(out.directory / "summary.json");
    return 0;
}

inline int run_verify(const RunConfig& cfg) {
    const VerifyConfig& vc = cfg.verify;
    BenchmarkSetup setup = vc.benchmark == "heat" ? heat_setup(vc.T, vc.L, vc.amplitude)
                                                  : neumann_setup(NeumannBenchmark(vc.constants), vc.t0, vc.T, vc.L, 1e300);
    setup.problem.solver = cfg.solver;
    const StudyReport rep = refinement_study(vc.benchmark, setup, vc.levels, cfg.workers);
    const auto& dir = cfg.output.directory;
    write_study_csv(rep, dir / "study.csv");
    std::string summary = study_summary(rep);
    bool ok = rep.passed();
    if (!vc.functional_ns.empty()) {
        const FunctionalGapReport gaps =
            functional_convergence_study(setup.g_true, setup.problem, vc.functional_ns, vc.refinement, cfg.workers);
        write_gap_csv(gaps, dir / "functional_gaps.csv");
        summary += std::string("  [") + (gaps.strictly_decreasing ? "PASS" : "FAIL") +
                   "] functional_gaps_decreasing\n";
        ok = ok && gaps.strictly_decreasing;
    }
    {
        auto out = io::open_output(dir / "summary.txt");
        out << summary;
    }
    std::cout << summary;
    if (!ok) throw VerificationError("verification audits failed; see " + (dir / "summary.txt").string());
    return 0;
}

} // namespace detail

/// Runs a validated configuration. Library errors propagate as StefanError.
inline int run(const RunConfig& cfg) {
    switch (cfg.mode) {
    case RunMode::solve: return detail::run_solve(cfg);
    case RunMode::optimize: return detail::run_optimize(cfg);
    case RunMode::verify: return detail::run_verify(cfg);
    }
    return 0;
}

/// Error payload written next to the outputs when a run fails.
inline void write_error_report(const StefanError& e, const std::filesystem::path& dir) {
    detail::JsonWriter j;
    j.integer("exit_code", e.exit_code());
    j.text("message", e.what());
    if (const auto* s = dynamic_cast<const SolverError*>(&e)) {
        j.integer("step", s->step());
        j.number("last_update", s->last_update());
    }
    j.write(dir / "error.json");
}

} // namespace stefan
