#include "stefan/solver.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <filesystem>
#include <random>

using namespace stefan;
using namespace stefan::testing;

namespace {

ProblemData zero_data() { return ProblemData{FieldFunction::constant(0.0), c(0.0), c(0.0), c(0.0)}; }

SolverParams mode(SolverMode md) {
    SolverParams p;
    p.mode = md;
    return p;
}

} // namespace

TEST(ScalarSolve, LinearEnthalpy) {
    const MollifiedEnthalpy bm(enthalpy(linear_material(2.0)), 0.1);
    EXPECT_NEAR(scalar_monotone_solve(1.0, 3.0, bm).x, 1.0, 1e-14);
}

TEST(ScalarSolve, VanishingCoupling) {
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.01);
    EXPECT_NEAR(scalar_monotone_solve(1e-12, 5.0, bm).x, 5.0, 1e-9);
}

TEST(ScalarSolve, MollifiedJumpAgainstBisection) {
    const MollifiedEnthalpy bm(enthalpy(two_phase(1.0)), 1e-3);
    for (double rhs : {0.5, -0.2, 0.0007, 1.3, 40.0}) {
        for (double cc : {1.0, 0.01, 100.0}) {
            const double oracle = bisection_root([&](double x) { return x + cc * bm(x) - rhs; }, -100.0, 100.0, 2000);
            const ScalarSolution s = scalar_monotone_solve(cc, rhs, bm, 0.0, 1e-14);
            EXPECT_NEAR(s.x, oracle, 1e-12 * std::max(1.0, std::abs(oracle))) << "rhs=" << rhs << " c=" << cc;
            EXPECT_LE(std::abs(s.x + cc * bm(s.x) - rhs), 1e-14 * std::max(1.0, std::abs(rhs)) * 4);
        }
    }
}

TEST(ScalarSolve, RejectsNonPositiveCoupling) {
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.01);
    EXPECT_THROW(scalar_monotone_solve(0.0, 1.0, bm), PreconditionError);
}

TEST(SolveStep, ConstantRowIsFixedPoint) {
    const Grid g(4, 6, 1.0, 1.0);
    ProblemData d = zero_data();
    d.phi = c(-0.7);
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.05);
    const std::vector<double> prev(7, -0.7);
    std::vector<double> bprev(7, bm(-0.7));
    for (SolverMode md : {SolverMode::jacobi, SolverMode::gauss_seidel, SolverMode::newton}) {
        const StepResult r = solve_step(prev, bprev, 1, sd, DiscreteControl::zeros(4), g, bm, mode(md));
        for (double v : r.row) EXPECT_EQ(v, -0.7);
        EXPECT_LE(r.report.iterations, 1) << to_string(md);
    }
}

TEST(SolveStep, SingleCellLinearSystem) {
    // b = v, m = 1: v0 + c v0 - v1 = c v0_prev + h^2 f - h g,  v1 - v0 = h p.
    const double T = 0.5, L = 0.8;
    const Grid g(1, 1, T, L);
    ProblemData d = zero_data();
    d.f = FieldFunction::constant(0.3);
    d.p = c(-0.4);
    d.phi = c(1.1);
    const SteklovData sd = steklov_averages(d, g, 10.0);
    const MollifiedEnthalpy bm(enthalpy(linear_material()), 0.1);
    const DiscreteControl gd({0.0, 0.25});
    const double h = L, cc = h * h / T;
    const double v0 = (cc * 1.1 + h * h * 0.3 - h * 0.25 + h * (-0.4)) / cc;
    const double v1 = v0 + h * (-0.4);
    for (SolverMode md : {SolverMode::jacobi, SolverMode::gauss_seidel, SolverMode::newton}) {
        const SolverParams p = mode(md);
        // Iterative modes stop at the update tolerance; Newton solves a linear system exactly.
        const double tol = md == SolverMode::newton ? 1e-13 : 10 * p.tol * (1 + 1.1);
        const SolveResult r = solve_all(gd, sd, g, bm, p);
        EXPECT_NEAR(r.state(1, 0), v0, tol) << to_string(md);
        EXPECT_NEAR(r.state(1, 1), v1, tol) << to_string(md);
    }
}

TEST(SolveStep, JacobiAgreesWithNewtonOnTwoPhaseRow) {
    const Grid g(3, 2, 0.05, 1.0);
    ProblemData d;
    d.f = FieldFunction(parse_polynomial("x - t", {"x", "t"}));
    d.p = c(0.2);
    d.phi = ScalarFunction(parse_polynomial("0.3 - x", {"x"}));
    d.gamma = c(0.0);
    const SteklovData sd = steklov_averages(d, g, 10.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase(0.8, 1.0, 1.0, 2.0, 1.0)), 0.05);
    const DiscreteControl gd({0.0, -0.3, -0.1, 0.2});
    const SolverParams pj = mode(SolverMode::jacobi);
    const SolveResult a = solve_all(gd, sd, g, bm, pj);
    const SolveResult b = solve_all(gd, sd, g, bm, mode(SolverMode::newton));
    for (int k = 0; k <= 3; ++k)
        for (int i = 0; i <= 2; ++i) EXPECT_NEAR(a.state(k, i), b.state(k, i), 10 * pj.tol);
}

TEST(SolveAll, ZeroDataGivesZeroState) {
    const Grid g(8, 8, 1.0, 1.0);
    const SteklovData sd = steklov_averages(zero_data(), g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(linear_material()), 0.1);
    const SolveResult r = solve_all(DiscreteControl::zeros(8), sd, g, bm, SolverParams{});
    for (double v : r.state.values()) EXPECT_EQ(v, 0.0);
    EXPECT_LE(residual_check(r.state, sd, DiscreteControl::zeros(8), g, bm), 1e-12);
}

TEST(SolveAll, ConstantAwayFromJumpIsSteady) {
    for (int n : {1, 7, 32}) {
        const Grid g(n, 2 * n, 1.0, 2.0);
        ProblemData d = zero_data();
        d.phi = c(0.6);
        const SteklovData sd = steklov_averages(d, g, 1.0);
        const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.05);
        for (SolverMode md : {SolverMode::jacobi, SolverMode::newton}) {
            const SolveResult r = solve_all(DiscreteControl::zeros(n), sd, g, bm, mode(md));
            for (double v : r.state.values()) EXPECT_NEAR(v, 0.6, 1e-12);
        }
    }
}

TEST(SolveAll, FluxClosureHoldsExactly) {
    const Grid g(10, 12, 0.5, 1.0);
    ProblemData d = zero_data();
    d.p = ScalarFunction(parse_polynomial("1 - 2*t", {"t"}));
    d.phi = ScalarFunction(parse_polynomial("x - 0.4", {"x"}));
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.1);
    const SolveResult r = solve_all(DiscreteControl(std::vector<double>(11, 0.3)), sd, g, bm, SolverParams{});
    for (int k = 1; k <= g.n; ++k)
        EXPECT_NEAR(r.state(k, g.m) - r.state(k, g.m - 1), g.h() * sd.p(k), 1e-15 * (1 + std::abs(r.state(k, g.m))));
}

TEST(SolveAll, ResidualWithinTenTol) {
    const Grid g(16, 16, 0.5, 1.0);
    ProblemData d;
    d.f = FieldFunction(parse_polynomial("1 + x*t", {"x", "t"}));
    d.p = c(-0.5);
    d.phi = ScalarFunction(parse_polynomial("0.2 - x", {"x"}));
    d.gamma = c(0.0);
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase(1.0, 1.0, 2.0, 3.0, 1.0)), 1.0 / 16);
    const DiscreteControl gd = DiscreteControl(std::vector<double>(17, -0.8));
    for (SolverMode md : {SolverMode::jacobi, SolverMode::gauss_seidel, SolverMode::newton}) {
        const SolverParams p = mode(md);
        const SolveResult r = solve_all(gd, sd, g, bm, p);
        EXPECT_LE(residual_check(r.state, sd, gd, g, bm), 10 * p.tol * (1 + detail::sup_norm(r.state.values()))) << to_string(md);
    }
}

TEST(SolveAll, PerturbedStateHasLargeResidual) {
    const Grid g(8, 8, 0.2, 1.0);
    ProblemData d = zero_data();
    d.phi = ScalarFunction(parse_polynomial("x - 0.5", {"x"}));
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.125);
    const DiscreteControl gd = DiscreteControl::zeros(8);
    SolveResult r = solve_all(gd, sd, g, bm, SolverParams{});
    const double h = g.h();
    const double bound = h * std::min(1.0, h * h * bm.bbar() / g.tau()) / 2.0;
    for (int k : {1, 4, 8}) {
        for (int i : {0, 3, 8}) {
            DiscreteState s = r.state;
            s(k, i) += 1.0;
            EXPECT_GE(residual_check(s, sd, gd, g, bm), bound) << "k=" << k << " i=" << i;
        }
    }
}

TEST(SolveAll, BitIdenticalRepeats) {
    const Grid g(12, 10, 0.3, 1.0);
    ProblemData d = zero_data();
    d.phi = ScalarFunction(parse_polynomial("0.5 - x", {"x"}));
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase(0.5)), 0.1);
    const DiscreteControl gd(std::vector<double>(13, -1.0));
    EXPECT_EQ(solve_all(gd, sd, g, bm, SolverParams{}).state, solve_all(gd, sd, g, bm, SolverParams{}).state);
}

TEST(SolveAll, JacobiContractionOnEveryIteration) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    long ratios = 0;
    for (int rep = 0; rep < 4; ++rep) {
        const Grid g(8, 16, 0.02, 1.0);
        ProblemData d;
        d.f = FieldFunction::constant(U(rng));
        d.p = c(U(rng));
        d.phi = ScalarFunction(Polynomial::univariate({U(rng), U(rng)}));
        d.gamma = c(0.0);
        const SteklovData sd = steklov_averages(d, g, 1.0);
        const MollifiedEnthalpy bm(enthalpy(two_phase(0.5 + 0.5 * (U(rng) + 1), 1.0, 1.5, 2.0, 1.0)), 0.1);
        DiscreteControl gd = DiscreteControl::zeros(8);
        for (double& v : gd.g) v = U(rng);
        const SolveResult r = solve_all(gd, sd, g, bm, mode(SolverMode::jacobi));
        for (const auto& rep_k : r.reports) {
            EXPECT_EQ(rep_k.contraction_violations(1e-12), 0);
            ratios += static_cast<long>(rep_k.ratios().size());
            EXPECT_NEAR(rep_k.delta, contraction_factor(g, bm.bbar()), 0.0);
        }
    }
    EXPECT_GT(ratios, 100);
}

TEST(SolveAll, MaxIterFailureCarriesStep) {
    const Grid g(4, 32, 1.0, 1.0);
    ProblemData d = zero_data();
    d.phi = ScalarFunction(parse_polynomial("0.5 - x", {"x"}));
    const SteklovData sd = steklov_averages(d, g, 1.0);
    const MollifiedEnthalpy bm(enthalpy(two_phase()), 0.05);
    SolverParams p = mode(SolverMode::jacobi);
    p.max_iter = 1;
    try {
        solve_all(DiscreteControl(std::vector<double>(5, -1.0)), sd, g, bm, p);
        FAIL() << "expected a solver error";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.step(), 1);
        EXPECT_GT(e.last_update(), 0.0);
        EXPECT_EQ(e.exit_code(), 2);
    }
}

TEST(StateIo, BinaryRoundTripIsBitIdentical) {
    DiscreteState s(3, 4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1e3);
    for (double& v : s.values()) v = N(rng);
    s(1, 1) = -0.0;
    s(2, 2) = 1e-310;
    const auto path = std::filesystem::temp_directory_path() / "stefan_state_roundtrip.bin";
    write_state_binary(s, path);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 8u * 4u * 5u);
    const DiscreteState back = read_state_binary(path);
    ASSERT_EQ(back.n(), 3);
    ASSERT_EQ(back.m(), 4);
    EXPECT_EQ(std::memcmp(back.values().data(), s.values().data(), sizeof(double) * s.values().size()), 0);
    std::filesystem::remove(path);
}

TEST(StateIo, RejectsForeignFile) {
    const auto path = std::filesystem::temp_directory_path() / "stefan_not_a_state.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "garbage-garbage-garbage";
    }
    EXPECT_THROW(read_state_binary(path), ConfigError);
    std::filesystem::remove(path);
}
