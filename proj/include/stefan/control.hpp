#pragma once

// Discrete cost I_n, the fine-grid surrogate of the continuous cost J, and a
// projected compass search over the control ball.

#include "stefan/discretization.hpp"
#include "stefan/error.hpp"
#include "stefan/function.hpp"
#include "stefan/io.hpp"
#include "stefan/physics.hpp"
#include "stefan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace stefan {

/// I_n = sum_k tau (v_m(k) - Gamma_k)^2
inline double cost_In(const DiscreteState& s, const SteklovData& sd, const Grid& grid) {
    if (s.n() != grid.n || s.m() != grid.m || sd.n() != grid.n) throw PreconditionError("cost_In: shape mismatch");
    double sum = 0.0;
    for (int k = 1; k <= grid.n; ++k) {
        const double d = s(k, grid.m) - sd.gamma(k);
        sum += d * d;
    }
    return grid.tau() * sum;
}

/// Continuous optimal control problem: material, data, horizon, domain and ball radius.
struct ControlProblem {
    std::shared_ptr<const EnthalpyFunction> enthalpy;
    ProblemData data;
    double T = 1.0;
    double L = 1.0;
    double R = 1.0;
    /// Mollification width; 1/n when absent.
    std::optional<double> epsilon;
    SolverParams solver;

    static ControlProblem make(const PhaseSpec& phases, ProblemData data, double T, double L, double R) {
        ControlProblem p;
        p.enthalpy = std::make_shared<const EnthalpyFunction>(phases);
        p.data = std::move(data);
        p.T = T;
        p.L = L;
        p.R = R;
        if (!(R > 0.0)) throw ConfigError("control ball radius R must be positive");
        return p;
    }
};

/// Everything needed to evaluate discrete controls on one grid.
struct DiscreteProblem {
    Grid grid;
    SteklovData sd;
    MollifiedEnthalpy bm;
    SolverParams params;
};

inline DiscreteProblem discretize(const ControlProblem& p, int n, int m = 0) {
    if (!p.enthalpy) throw PreconditionError("control problem has no enthalpy");
    const Grid grid(n, m > 0 ? m : n, p.T, p.L);
    const double eps = p.epsilon.value_or(1.0 / n);
    return DiscreteProblem{grid, steklov_averages(p.data, grid, p.R), MollifiedEnthalpy(p.enthalpy, eps), p.solver};
}

struct ControlEvaluation {
    double value;
    SolveResult solve;
};

inline void check_in_ball(const DiscreteControl& gd, const Grid& grid, double R) {
    const double norm = w21_discrete_norm(gd, grid);
    if (norm > R + 1e-12 * (1.0 + R))
        throw PreconditionError("control norm " + io::fmt(norm) + " exceeds the ball radius " + io::fmt(R));
}

inline ControlEvaluation evaluate_control(const DiscreteControl& gd, const DiscreteProblem& dp) {
    check_control(gd, dp.grid);
    check_in_ball(gd, dp.grid, dp.sd.R());
    SolveResult r = solve_all(gd, dp.sd, dp.grid, dp.bm, dp.params);
    const double value = cost_In(r.state, dp.sd, dp.grid);
    return {value, std::move(r)};
}

/// Cell averages of an arbitrary control function on a grid, without the sample-density check.
inline DiscreteControl average_control(const ScalarFunction& g, const Grid& grid) {
    DiscreteControl gd = DiscreteControl::zeros(grid.n);
    gd[0] = g(0.0);
    for (int k = 1; k <= grid.n; ++k) gd[k] = g.average(grid.t(k - 1), grid.t(k));
    return gd;
}

/// Surrogate of the continuous cost J(g): I_{rn}(Q_{rn}(g)) on an r-times finer grid.
/// Not the exact J; its accuracy is that of the fine discretization.
inline double surrogate_J(const ScalarFunction& g, const ControlProblem& p, int n, int m, int r) {
    if (r < 4) throw PreconditionError("surrogate_J: refinement factor must be >= 4");
    const DiscreteProblem fine = discretize(p, r * n, r * m);
    const DiscreteControl gd = average_control(g, fine.grid);
    const SolveResult s = solve_all(gd, fine.sd, fine.grid, fine.bm, fine.params);
    return cost_In(s.state, fine.sd, fine.grid);
}

inline double surrogate_J(const PiecewiseLinear& g, const ControlProblem& p, int n, int m, int r) {
    return surrogate_J(ScalarFunction(g), p, n, m, r);
}

struct OptimizerParams {
    int max_evals = 20000;
    /// Initial step as a fraction of R; coordinate steps are that times R / sqrt(n).
    double initial_step = 0.25;
    double shrink = 0.5;
    /// Stop when the step fraction drops below this.
    double min_step = 1e-6;
    int restarts = 0;
    std::uint64_t seed = 1;
    /// After a sweep that improved, try the move x + (x - x_sweep_start).
    bool pattern_moves = true;

    void validate() const {
        if (max_evals < 1 || !(initial_step > 0.0) || !(min_step > 0.0) || restarts < 0)
            throw PreconditionError("optimizer: max_evals, steps must be positive, restarts >= 0");
        if (!(shrink > 0.0 && shrink < 1.0)) throw PreconditionError("optimizer: shrink must lie in (0, 1)");
    }
};

struct OptimizationRecord {
    int eval;
    double value;
    double norm;
    bool accepted;
};

struct OptimizationTrace {
    std::vector<OptimizationRecord> records;
    DiscreteControl best;
    double best_value = 0.0;
    double final_step = 0.0;
    bool step_converged = false;  ///< false when the evaluation budget ran out first
};

/// Objective seen by the optimizer. `accept` is called right after `evaluate`
/// when that trial becomes the incumbent.
class Objective {
public:
    virtual ~Objective() = default;
    virtual double evaluate(const DiscreteControl& trial) = 0;
    virtual void accept() {}
};

class FunctionObjective : public Objective {
public:
    explicit FunctionObjective(std::function<double(const DiscreteControl&)> f) : f_(std::move(f)) {}
    double evaluate(const DiscreteControl& trial) override { return f_(trial); }

private:
    std::function<double(const DiscreteControl&)> f_;
};

/// I_n with warm starts: rows below the first control entry that differs
/// from the incumbent are copied instead of recomputed. Results are
/// bit-identical to full solves.
class StateObjective : public Objective {
public:
    explicit StateObjective(const DiscreteProblem& dp) : dp_(dp) {}

    double evaluate(const DiscreteControl& trial) override {
        check_control(trial, dp_.grid);
        int first = 1;
        if (have_incumbent_) {
            while (first <= dp_.grid.n && trial[first] == incumbent_[first]) ++first;
            trial_state_ = incumbent_state_;
            trial_reports_ = incumbent_reports_;
        } else {
            trial_state_ = DiscreteState(dp_.grid.n, dp_.grid.m);
            for (int i = 0; i <= dp_.grid.m; ++i) trial_state_(0, i) = dp_.sd.phi(i);
            trial_reports_.clear();
        }
        if (first <= dp_.grid.n)
            solve_rows(trial_state_, trial_reports_, first, trial, dp_.sd, dp_.grid, dp_.bm, dp_.params);
        trial_ = trial;
        return cost_In(trial_state_, dp_.sd, dp_.grid);
    }

    void accept() override {
        incumbent_ = trial_;
        incumbent_state_ = trial_state_;
        incumbent_reports_ = trial_reports_;
        have_incumbent_ = true;
    }

    const DiscreteState& incumbent_state() const { return incumbent_state_; }

private:
    const DiscreteProblem& dp_;
    bool have_incumbent_ = false;
    DiscreteControl incumbent_, trial_;
    DiscreteState incumbent_state_, trial_state_;
    std::vector<StepReport> incumbent_reports_, trial_reports_;
};

/// Projected compass search over g_1..g_n; g_0 never enters the state
/// equations and is held at its initial value.
inline OptimizationTrace minimize(const DiscreteControl& initial, Objective& objective, const Grid& grid, double R,
                                  const OptimizerParams& params) {
    params.validate();
    check_control(initial, grid);
    const int n = grid.n;
    const double unit = R / std::sqrt(static_cast<double>(n));
    std::mt19937_64 rng(params.seed);

    OptimizationTrace trace;
    int evals = 0;
    DiscreteControl x = project_to_ball(initial, R, grid);
    double fx = objective.evaluate(x);
    objective.accept();
    ++evals;
    trace.records.push_back({evals, fx, w21_discrete_norm(x, grid), true});

    auto try_point = [&](DiscreteControl trial) {
        trial = project_to_ball(trial, R, grid);
        if (trial == x) return false;
        const double ft = objective.evaluate(trial);
        ++evals;
        const bool better = ft < fx;
        trace.records.push_back({evals, ft, w21_discrete_norm(trial, grid), better});
        if (better) {
            objective.accept();
            x = std::move(trial);
            fx = ft;
        }
        return better;
    };

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 1);
    double step = params.initial_step;
    for (int restart = 0; restart <= params.restarts && evals < params.max_evals; ++restart) {
        step = params.initial_step;
        while (step >= params.min_step && evals < params.max_evals) {
            std::shuffle(order.begin(), order.end(), rng);
            const DiscreteControl sweep_start = x;
            bool improved = false;
            for (int k : order) {
                for (double sign : {1.0, -1.0}) {
                    if (evals >= params.max_evals) break;
                    DiscreteControl trial = x;
                    trial[k] += sign * step * unit;
                    if (try_point(std::move(trial))) {
                        improved = true;
                        break;
                    }
                }
            }
            if (improved && params.pattern_moves && evals < params.max_evals) {
                DiscreteControl trial = x;
                for (int k = 1; k <= n; ++k) trial[k] += x[k] - sweep_start[k];
                try_point(std::move(trial));
            }
            if (!improved) step *= params.shrink;
        }
    }
    trace.best = x;
    trace.best_value = fx;
    trace.final_step = step;
    trace.step_converged = step < params.min_step;
    return trace;
}

inline OptimizationTrace minimize(const DiscreteControl& initial, const DiscreteProblem& dp,
                                  const OptimizerParams& params) {
    StateObjective objective(dp);
    return minimize(initial, objective, dp.grid, dp.sd.R(), params);
}

inline void write_trace_csv(const OptimizationTrace& trace, const std::filesystem::path& path) {
    auto out = io::open_output(path);
    out << "eval,I_n,norm,accepted\n";
    for (const auto& r : trace.records)
        out << r.eval << ',' << io::fmt(r.value) << ',' << io::fmt(r.norm) << ',' << (r.accepted ? 1 : 0) << '\n';
}

inline void write_control_csv(const DiscreteControl& gd, const Grid& grid, const std::filesystem::path& path) {
    auto out = io::open_output(path);
    out << "k,t_k,g_k\n";
    for (int k = 0; k <= grid.n; ++k) out << k << ',' << io::fmt(grid.t(k)) << ',' << io::fmt(gd[k]) << '\n';
}

} // namespace stefan
