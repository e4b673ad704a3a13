#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cge/error.hpp"
#include "cge/field_generators.hpp"
#include "cge/rng.hpp"
#include "cge/variational_solver.hpp"

namespace {

using namespace cge;

SolveConfig config_for(Discretization d, double tol = 1e-12) {
    SolveConfig c;
    c.discretization = d;
    c.cg_rel_tol = tol;
    return c;
}

ScalarGridFunction nodal(const GridSpec& g, double (*fn)(double, double)) {
    return ScalarGridFunction::from_nodal_function(g, TriadicCube::root(),
                                                   [fn](std::span<const double> x) { return fn(x[0], x[1]); });
}

double max_abs_diff(const ScalarGridFunction& a, const ScalarGridFunction& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

TEST(Solver, ParseNames) {
    EXPECT_EQ(parse_discretization("fd5"), Discretization::fd5);
    EXPECT_EQ(parse_discretization("q1fem"), Discretization::q1fem);
    EXPECT_THROW(parse_discretization("p2"), ConfigError);
    EXPECT_EQ(parse_preconditioner("none"), Preconditioner::none);
    EXPECT_THROW(parse_preconditioner("ilu"), ConfigError);
}

TEST(Solver, ConfigValidation) {
    SolveConfig c;
    c.cg_rel_tol = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.cg_rel_tol = 1e-8;
    c.cg_max_iter = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.cg_max_iter.reset();
    EXPECT_EQ(c.max_iterations(10000), 50 * 100 + 10000);
    EXPECT_NE(c.key().find("q1fem"), std::string::npos);
}

TEST(Solver, Fd5RejectsFullMatrices) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 1, 2, 3);
    const auto bc = ScalarGridFunction::zeros(f.grid(), TriadicCube::root(), Sampling::nodal);
    EXPECT_THROW(solve_dirichlet(f, TriadicCube::root(), bc, config_for(Discretization::fd5)), ConfigError);
}

TEST(Solver, IterationCapRaisesWithStats) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 3), 1e-2, 1e2, 3);
    const auto bc = nodal(f.grid(), [](double x, double y) { return std::exp(x) * std::cos(3 * y); });
    SolveConfig c = config_for(Discretization::q1fem);
    c.cg_max_iter = 2;
    try {
        solve_dirichlet(f, TriadicCube::root(), bc, c);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.stats().relative_residual, 1e-12);
        EXPECT_GT(e.stats().unknowns, 0);
    }
}

TEST(Solver, StiffnessIsSymmetricWithZeroRowSums) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 11);
    const StiffnessOperator op = assemble(f, TriadicCube::root(), config_for(Discretization::q1fem));
    for (std::int64_t i = 0; i < op.matrix.rows; ++i) {
        double sum = 0;
        for (auto k = op.matrix.row_ptr[static_cast<std::size_t>(i)]; k < op.matrix.row_ptr[static_cast<std::size_t>(i + 1)];
             ++k) {
            const auto j = op.matrix.cols[static_cast<std::size_t>(k)];
            sum += op.matrix.vals[static_cast<std::size_t>(k)];
            EXPECT_NEAR(op.matrix.vals[static_cast<std::size_t>(k)], op.matrix.coeff(j, i), 1e-14);
        }
        EXPECT_NEAR(sum, 0.0, 1e-12);
    }
}

TEST(Solver, AffineIsExactForConstantCoefficients) {
    const GridSpec g = GridSpec::make(2, 3);
    const std::array<double, 3> a{2.0, 0.0, 5.0};
    const CoefficientField f = gen_constant(g, SymMat::from_components(2, a));
    const auto exact = nodal(g, [](double x, double y) { return 1.5 + 0.3 * x - 2.0 * y; });
    for (auto d : {Discretization::q1fem, Discretization::fd5}) {
        const Solution s = solve_dirichlet(f, TriadicCube::root(), exact, config_for(d));
        EXPECT_LT(max_abs_diff(s.u, exact), 1e-10) << to_string(d);
    }
}

TEST(Solver, AffineIsExactForFullConstantMatrix) {
    const GridSpec g = GridSpec::make(2, 2);
    const std::array<double, 3> a{2.0, 0.7, 1.0};
    const CoefficientField f = gen_constant(g, SymMat::from_components(2, a));
    const auto exact = nodal(g, [](double x, double y) { return -x + 4 * y; });
    const Solution s = solve_dirichlet(f, TriadicCube::root(), exact, config_for(Discretization::q1fem));
    EXPECT_LT(max_abs_diff(s.u, exact), 1e-10);
}

TEST(Solver, ConstantsAreExact) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 1e-3, 1e3, 1, true);
    const auto bc = nodal(f.grid(), [](double, double) { return 7.25; });
    const Solution s = solve_dirichlet(f, TriadicCube::root(), bc, config_for(Discretization::fd5));
    for (double v : s.u.values) EXPECT_NEAR(v, 7.25, 1e-12);
}

TEST(Solver, Fd5DiscreteMaximumPrinciple) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CoefficientField f = gen_random_spd(GridSpec::make(2, 3), 1e-3, 1e3, seed, true);
        const CounterRng rng(seed);
        auto bc = ScalarGridFunction::zeros(f.grid(), TriadicCube::root(), Sampling::nodal);
        for (std::size_t i = 0; i < bc.values.size(); ++i) bc.values[i] = rng.uniform(0, i, 0) * 2 - 1;
        const Solution s = solve_dirichlet(f, TriadicCube::root(), bc, config_for(Discretization::fd5));
        const std::int64_t m = bc.points_per_side();
        double lo = 1e300, hi = -1e300;
        for (std::int64_t i = 0; i < bc.point_count(); ++i) {
            const Index idx = f.grid().unravel(i, m);
            if (idx[0] == 0 || idx[1] == 0 || idx[0] == m - 1 || idx[1] == m - 1) {
                lo = std::min(lo, bc.values[static_cast<std::size_t>(i)]);
                hi = std::max(hi, bc.values[static_cast<std::size_t>(i)]);
            }
        }
        for (double v : s.u.values) {
            EXPECT_GE(v, lo - 1e-9);
            EXPECT_LE(v, hi + 1e-9);
        }
    }
}

TEST(Solver, GalerkinMinimality) {
    // The discrete solution minimizes the energy among functions with the same boundary values.
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 3), 1e-2, 1e2, 9);
    const auto bc = nodal(f.grid(), [](double x, double y) { return x * y + std::sin(4 * x); });
    const Solution s = solve_dirichlet(f, TriadicCube::root(), bc, config_for(Discretization::q1fem));
    const double e0 = energy(f, TriadicCube::root(), s.u);
    const CounterRng rng(3);
    const std::int64_t m = s.u.points_per_side();
    for (int trial = 0; trial < 10; ++trial) {
        ScalarGridFunction v = s.u;
        for (std::int64_t i = 0; i < v.point_count(); ++i) {
            const Index idx = f.grid().unravel(i, m);
            if (idx[0] > 0 && idx[1] > 0 && idx[0] < m - 1 && idx[1] < m - 1) {
                v.values[static_cast<std::size_t>(i)] += 1e-2 * (rng.uniform(trial, i, 0) - 0.5);
            }
        }
        EXPECT_GE(energy(f, TriadicCube::root(), v), e0 * (1 - 1e-12));
    }
}

TEST(Solver, EnergyOfAffineMatchesClosedForm) {
    const GridSpec g = GridSpec::make(2, 2);
    const std::array<double, 3> a{3.0, 1.0, 2.0};
    const CoefficientField f = gen_constant(g, SymMat::from_components(2, a));
    const auto u = nodal(g, [](double x, double y) { return 2 * x - y; });
    // (2,-1) . a (2,-1) = 12 - 4 + 2
    EXPECT_NEAR(energy(f, TriadicCube::root(), u), 10.0, 1e-12);
    const Vec grad = average_gradient(u);
    EXPECT_NEAR(grad[0], 2.0, 1e-13);
    EXPECT_NEAR(grad[1], -1.0, 1e-13);
    const Vec flux = average_flux(f, u);
    EXPECT_NEAR(flux[0], 5.0, 1e-12);
    EXPECT_NEAR(flux[1], 0.0, 1e-12);
}

TEST(Solver, GradientForcingOnConstantField) {
    const GridSpec g = GridSpec::make(2, 3);
    const std::array<double, 3> a{4.0, 1.0, 2.0};
    const SymMat A = SymMat::from_components(2, a);
    const CoefficientField f = gen_constant(g, A);
    const std::array<double, 2> p{1.0, -2.0};
    const ForcingSolution sol =
        solve_linear_forcing(f, TriadicCube::root(), p, Forcing::gradient, config_for(Discretization::q1fem));
    EXPECT_NEAR(sol.value, A.inverse().quadratic(p), 1e-10);
    const ForcingSolution flux =
        solve_linear_forcing(f, TriadicCube::root(), p, Forcing::flux, config_for(Discretization::q1fem));
    EXPECT_NEAR(flux.value, A.quadratic(p), 1e-10);
}

TEST(Solver, ForcingRejectsZeroDirection) {
    const CoefficientField f = gen_constant(GridSpec::make(2, 1), SymMat::identity(2));
    const std::array<double, 2> zero{0, 0};
    EXPECT_THROW(solve_linear_forcing(f, TriadicCube::root(), zero, Forcing::gradient, SolveConfig{}), ValidationError);
    const std::array<double, 3> wrong{1, 0, 0};
    EXPECT_THROW(forcing_vector(f, TriadicCube::root(), wrong, Forcing::gradient), ValidationError);
}

double refinement_error(Discretization d, int level) {
    const GridSpec g = GridSpec::make(2, level);
    const CoefficientField f = gen_constant(g, SymMat::identity(2));
    const auto exact = nodal(g, [](double x, double y) { return std::exp(2 * x) * std::cos(2 * y); });
    const Solution s = solve_dirichlet(f, TriadicCube::root(), exact, config_for(d, 1e-13));
    return max_abs_diff(s.u, exact);
}

TEST(Solver, SecondOrderConvergence) {
    for (auto d : {Discretization::q1fem, Discretization::fd5}) {
        const double e2 = refinement_error(d, 2);
        const double e3 = refinement_error(d, 3);
        const double e4 = refinement_error(d, 4);
        EXPECT_GE(std::log(e2 / e3) / std::log(3.0), 1.9) << to_string(d);
        EXPECT_GE(std::log(e3 / e4) / std::log(3.0), 1.9) << to_string(d);
    }
}

TEST(Solver, SubcubeSolveUsesLocalNodes) {
    const CoefficientField f = gen_constant(GridSpec::make(2, 2), SymMat::identity(2));
    const TriadicCube cube{-1, {1, 1, 0}};
    const auto bc = ScalarGridFunction::from_nodal_function(f.grid(), cube,
                                                            [](std::span<const double> x) { return x[0] + x[1]; });
    EXPECT_EQ(bc.point_count(), 16);
    const Solution s = solve_dirichlet(f, cube, bc, config_for(Discretization::fd5));
    EXPECT_LT(max_abs_diff(s.u, bc), 1e-12);
}

TEST(Solver, Works3d) {
    const GridSpec g = GridSpec::make(3, 2);
    const std::array<double, 3> diag{1, 2, 3};
    const CoefficientField f = gen_constant(g, SymMat::diagonal(diag));
    const std::array<double, 3> p{0, 0, 1};
    const ForcingSolution sol = solve_linear_forcing(f, TriadicCube::root(), p, Forcing::gradient, config_for(Discretization::q1fem));
    EXPECT_NEAR(sol.value, 1.0 / 3.0, 1e-10);
}

}  // namespace
