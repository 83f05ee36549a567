#include "stefan/discretization.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace stefan;
using namespace stefan::testing;

namespace {

ProblemData zero_data() {
    return ProblemData{FieldFunction::constant(0.0), c(0.0), c(0.0), c(0.0)};
}

} // namespace

TEST(GridTest, EndpointsAreExact) {
    const Grid g(7, 3, 0.3, 0.7);
    EXPECT_EQ(g.t(7), 0.3);
    EXPECT_EQ(g.x(3), 0.7);
    EXPECT_EQ(g.t(0), 0.0);
    EXPECT_THROW(Grid(0, 3, 1.0, 1.0), PreconditionError);
    EXPECT_THROW(Grid(3, 3, -1.0, 1.0), PreconditionError);
}

TEST(Steklov, LinearInitialProfile) {
    ProblemData d = zero_data();
    d.phi = ScalarFunction(Polynomial::variable(0));
    const SteklovData sd = steklov_averages(d, Grid(1, 2, 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(sd.phi(0), 0.25);
    EXPECT_DOUBLE_EQ(sd.phi(1), 0.75);
    EXPECT_DOUBLE_EQ(sd.phi(2), 1.0);
}

TEST(Steklov, ConstantFluxAndProductForcing) {
    ProblemData d = zero_data();
    d.p = c(3.0);
    d.f = FieldFunction(parse_polynomial("x*t", {"x", "t"}));
    const SteklovData sd1 = steklov_averages(d, Grid(1, 1, 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(sd1.f(0, 1), 0.25);
    const SteklovData sd = steklov_averages(d, Grid(5, 2, 1.0, 1.0), 1.0);
    for (int k = 1; k <= 5; ++k) EXPECT_DOUBLE_EQ(sd.p(k), 3.0);
}

TEST(Steklov, CallableDataMatchesPolynomialData) {
    ProblemData poly = zero_data();
    poly.f = FieldFunction(parse_polynomial("x^2*t + 3*t^3", {"x", "t"}));
    ProblemData call = zero_data();
    call.f = FieldFunction([](double x, double t) { return x * x * t + 3 * t * t * t; }, "f");
    const Grid g(4, 3, 0.8, 1.3);
    const SteklovData a = steklov_averages(poly, g, 1.0);
    const SteklovData b = steklov_averages(call, g, 1.0);
    for (int k = 1; k <= g.n; ++k)
        for (int i = 0; i < g.m; ++i) EXPECT_NEAR(a.f(i, k), b.f(i, k), 1e-10 * std::abs(a.f(i, k)) + 1e-14);
}

TEST(QnMap, LinearAndConstant) {
    const Grid g(2, 1, 1.0, 1.0);
    const DiscreteControl a = qn_map(ScalarFunction(Polynomial::variable(0)), g);
    EXPECT_EQ(a.g, (std::vector<double>{0.0, 0.25, 0.75}));
    const DiscreteControl b = qn_map(c(2.5), Grid(5, 1, 1.0, 1.0));
    for (double v : b.g) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(QnMap, SineAgainstMidpointOracle) {
    const Grid g(4, 1, 1.0, 1.0);
    const DiscreteControl gd = qn_map(ScalarFunction([](double t) { return std::sin(t); }, "sin"), g);
    EXPECT_EQ(gd[0], 0.0);
    for (int k = 1; k <= 4; ++k) {
        const double a = g.t(k - 1), b = g.t(k);
        double mid = 0.0;
        const int N = 1000;
        for (int j = 0; j < N; ++j) mid += std::sin(a + (j + 0.5) * (b - a) / N);
        mid /= N;
        const double closed = (std::cos(a) - std::cos(b)) / g.tau();
        EXPECT_NEAR(gd[k], closed, 1e-12);
        EXPECT_NEAR(gd[k], mid, 1e-7);
    }
}

TEST(QnMap, SampledControlNeedsEnoughSamples) {
    const Grid g(4, 1, 1.0, 1.0);
    std::vector<double> t, v;
    for (int j = 0; j <= 20; ++j) {
        t.push_back(j / 20.0);
        v.push_back(j / 20.0);
    }
    EXPECT_THROW(qn_map(ScalarFunction(PiecewiseLinear(t, v)), g), PreconditionError);
    t.clear();
    v.clear();
    for (int j = 0; j <= 40; ++j) {
        t.push_back(j / 40.0);
        v.push_back(j / 40.0);
    }
    const DiscreteControl gd = qn_map(ScalarFunction(PiecewiseLinear(t, v)), g);
    EXPECT_NEAR(gd[2], 0.375, 1e-15);
}

TEST(PnMap, InterpolatesAndRoundTrips) {
    const Grid g1(1, 1, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(pn_map(DiscreteControl({0.0, 1.0}), g1)(0.5), 0.5);
    const Grid g(6, 1, 1.0, 1.0);
    const PiecewiseLinear cst = pn_map(DiscreteControl(std::vector<double>(7, 1.5)), g);
    for (double t = 0.0; t <= 1.0; t += 0.07) EXPECT_DOUBLE_EQ(cst(t), 1.5);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    DiscreteControl gd = DiscreteControl::zeros(6);
    for (double& v : gd.g) v = U(rng);
    const DiscreteControl back = qn_map(pn_map(gd, g), g);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(back[k], 0.5 * (gd[k - 1] + gd[k]), 1e-14);
    EXPECT_EQ(back[0], gd[0]);
}

TEST(Norms, DiscreteExamples) {
    const Grid g1(1, 1, 1.0, 1.0);
    EXPECT_EQ(w21_discrete_norm(DiscreteControl::zeros(1), g1), 0.0);
    EXPECT_DOUBLE_EQ(w21_discrete_norm(DiscreteControl({0.0, 1.0}), g1), std::sqrt(2.0));
    const Grid g(8, 1, 1.0, 1.0);
    EXPECT_NEAR(w21_discrete_norm(DiscreteControl(std::vector<double>(9, 1.0)), g), 1.0, 1e-15);
}

TEST(Norms, ContinuousExamplesAndSimpsonOracle) {
    EXPECT_EQ(w21_continuous_norm(PiecewiseLinear({0.0, 1.0}, {0.0, 0.0})), 0.0);
    EXPECT_DOUBLE_EQ(w21_continuous_norm(PiecewiseLinear({0.0, 1.0}, {1.0, 1.0})), 1.0);
    EXPECT_NEAR(w21_continuous_norm(PiecewiseLinear({0.0, 1.0}, {0.0, 1.0})), std::sqrt(4.0 / 3.0), 1e-15);
    const PiecewiseLinear g({0.0, 0.3, 0.5, 1.0}, {1.0, -2.0, 0.5, 0.25});
    double sq = 0.0;
    for (std::size_t j = 1; j < g.knots.size(); ++j) {
        const double a = g.knots[j - 1], b = g.knots[j];
        const double slope = (g.values[j] - g.values[j - 1]) / (b - a);
        sq += simpson([&](double t) { return g(t) * g(t); }, a, b, 200) + slope * slope * (b - a);
    }
    EXPECT_NEAR(w21_continuous_norm(g), std::sqrt(sq), 1e-12);
}

TEST(Projection, Examples) {
    const Grid g(4, 1, 1.0, 1.0);
    const DiscreteControl small({0.1, 0.1, 0.1, 0.1, 0.1});
    EXPECT_EQ(project_to_ball(small, 1.0, g), small);
    EXPECT_EQ(project_to_ball(DiscreteControl::zeros(4), 0.3, g), DiscreteControl::zeros(4));
    const DiscreteControl big({0.0, 3.0, -1.0, 2.0, 5.0});
    const double R = 0.5 * w21_discrete_norm(big, g);
    const DiscreteControl p = project_to_ball(big, R, g);
    EXPECT_NEAR(w21_discrete_norm(p, g), R, 1e-14 * R);
    for (int k = 0; k <= 4; ++k) EXPECT_NEAR(p[k], 0.5 * big[k], 1e-15);
    EXPECT_THROW(project_to_ball(big, 0.0, g), PreconditionError);
}

TEST(Controls, LipschitzBoundInsideBall) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int n : {4, 16, 64}) {
        const Grid g(n, 1, 1.0, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            DiscreteControl gd = DiscreteControl::zeros(n);
            for (double& v : gd.g) v = N(rng);
            const double R = 2.0;
            gd = project_to_ball(gd, R, g);
            for (int k = 1; k <= n; ++k)
                EXPECT_LE(std::abs(gd[k] - gd[k - 1]), R * std::sqrt(g.tau()) * (1.0 + 1e-12));
        }
    }
}

TEST(Controls, LengthMismatchRejected) {
    EXPECT_THROW(check_control(DiscreteControl::zeros(3), Grid(4, 1, 1.0, 1.0)), PreconditionError);
}

TEST(SteklovOutput, WritesFourFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "stefan_steklov_test";
    std::filesystem::remove_all(dir);
    const SteklovData sd = steklov_averages(zero_data(), Grid(2, 2, 1.0, 1.0), 1.0);
    write_steklov_csv(sd, dir);
    for (const char* f : {"f_avg.csv", "p_avg.csv", "gamma_avg.csv", "phi_avg.csv"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    std::filesystem::remove_all(dir);
}
