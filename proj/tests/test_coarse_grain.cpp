#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cge/coarse_grain.hpp"
#include "cge/error.hpp"
#include "cge/field_generators.hpp"
#include "cge/rng.hpp"

namespace {

using namespace cge;
namespace fs = std::filesystem;

SweepOptions tight() {
    SweepOptions o;
    o.solve.cg_rel_tol = 1e-12;
    return o;
}

TEST(CoarseGrain, FinestCubeCopiesCell) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 1), 0.5, 2, 4);
    const CoarseGrainPair p = coarse_grain_cube(f, TriadicCube{-1, {2, 1, 0}}, SolveConfig{});
    const SymMat cell = f.cell(7);
    for (const SymMat* m : {&p.astar, &p.amax, &p.avg, &p.inv_avg_inv}) {
        for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(m->components()[k], cell.components()[k]);
    }
    EXPECT_TRUE(p.stats.empty());
}

TEST(CoarseGrain, ConstantFieldIsExactOnEveryCube) {
    const std::array<double, 3> a{3.0, 0.5, 1.0};
    const SymMat A = SymMat::from_components(2, a);
    const SweepResult r = sweep(gen_constant(GridSpec::make(2, 3), A), tight());
    ASSERT_TRUE(r.complete());
    for (const auto& level : r.levels) {
        for (const auto& p : level) {
            for (std::size_t k = 0; k < 3; ++k) {
                EXPECT_NEAR(p.astar.components()[k], a[k], 1e-9);
                EXPECT_NEAR(p.amax.components()[k], a[k], 1e-9);
            }
        }
    }
}

TEST(CoarseGrain, AlignedLaminateMatchesMeans) {
    // Stripes normal to x_1: harmonic mean across, a = (a)_Q in both directions.
    const CoefficientField f = gen_laminate(GridSpec::make(2, 3), 0, {1, 2, 4});
    const CoarseGrainPair p = coarse_grain_cube(f, TriadicCube::root(), tight().solve);
    EXPECT_NEAR(p.astar(0, 0), 3.0 / 1.75, 1e-9);
    EXPECT_NEAR(p.astar(0, 1), 0.0, 1e-9);
    // Along the stripes the Neumann problem is not one-dimensional; only the chain applies.
    EXPECT_GT(p.astar(1, 1), 3.0 / 1.75);
    EXPECT_LT(p.astar(1, 1), 7.0 / 3.0);
    EXPECT_NEAR(p.amax(0, 0), 7.0 / 3.0, 1e-9);
    EXPECT_NEAR(p.amax(1, 1), 7.0 / 3.0, 1e-9);
}

TEST(CoarseGrain, LoewnerChainOnRandomField) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 1e-2, 1e2, 21);
    const CoarseGrainPair p = coarse_grain_cube(f, TriadicCube::root(), tight().solve);
    const double scale = p.avg.norm();
    EXPECT_LE(loewner_excess(p.inv_avg_inv, p.astar), 1e-9 * scale);
    EXPECT_LE(loewner_excess(p.astar, p.amax), 1e-9 * scale);
    EXPECT_LE(loewner_excess(p.amax, p.avg), 1e-9 * scale);
    EXPECT_NEAR(p.amax(0, 0), p.avg(0, 0), 1e-8 * scale);
    EXPECT_EQ(p.stats.size(), 4u);
}

TEST(CoarseGrain, RayleighQuotientsBoundFromBelow) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 1e-2, 1e2, 8);
    const TriadicCube Q = TriadicCube::root();
    const CoarseGrainPair p = coarse_grain_cube(f, Q, tight().solve);
    const SymMat astar_inv = p.astar.inverse();
    const CounterRng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto v = ScalarGridFunction::zeros(f.grid(), Q, Sampling::nodal);
        for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = rng.normal(trial, i);
        const double e = energy(f, Q, v);
        const Vec g = average_gradient(v);
        const Vec j = average_flux(f, v);
        const std::array<double, 2> q{rng.normal(99, trial), rng.normal(98, trial)};
        const double gq = g[0] * q[0] + g[1] * q[1];
        const double jq = j[0] * q[0] + j[1] * q[1];
        EXPECT_LE(gq * gq / e, astar_inv.quadratic(q) * (1 + 1e-9));
        EXPECT_LE(jq * jq / e, p.amax.quadratic(q) * (1 + 1e-9));
    }
}

TEST(CoarseGrain, SweepLevelsAndLookup) {
    const SweepResult r = sweep(gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 2), tight());
    ASSERT_EQ(r.levels.size(), 3u);
    EXPECT_EQ(r.at_level(0).size(), 1u);
    EXPECT_EQ(r.at_level(-2).size(), 81u);
    EXPECT_EQ(r.pair_count(), 91u);
    EXPECT_EQ(r.at(TriadicCube{-1, {1, 2, 0}}).cube, (TriadicCube{-1, {1, 2, 0}}));
    EXPECT_EQ(r.solves_performed, 10 * 4);
    EXPECT_THROW(r.at_level(1), RangeError);
}

TEST(CoarseGrain, ThreadCountDoesNotChangeResults) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 6);
    SweepOptions o = tight();
    const SweepResult a = sweep(f, o);
    o.threads = 3;
    const SweepResult b = sweep(f, o);
    for (std::size_t l = 0; l < a.levels.size(); ++l) {
        for (std::size_t i = 0; i < a.levels[l].size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                EXPECT_EQ(a.levels[l][i].astar.components()[k], b.levels[l][i].astar.components()[k]);
            }
        }
    }
}

TEST(CoarseGrain, WarmCachePerformsNoSolves) {
    const fs::path dir = fs::temp_directory_path() / "cge_cache_unit_test";
    fs::remove_all(dir);
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 12);
    SweepOptions o = tight();
    o.cache_dir = dir;
    const SweepResult cold = sweep(f, o);
    EXPECT_GT(cold.solves_performed, 0);
    EXPECT_EQ(cold.cache_hits, 0);
    const SweepResult warm = sweep(f, o);
    EXPECT_EQ(warm.solves_performed, 0);
    EXPECT_EQ(warm.cache_hits, 91);
    EXPECT_EQ(warm.at(TriadicCube::root()).astar.components()[1], cold.at(TriadicCube::root()).astar.components()[1]);
    // A different tolerance is a different cache entry.
    o.solve.cg_rel_tol = 1e-11;
    EXPECT_NE(cache_path(dir, f, o.solve, TriadicCube::root()), cache_path(dir, f, tight().solve, TriadicCube::root()));
    fs::remove_all(dir);
}

TEST(CoarseGrain, CorruptCacheRecordIsRecomputed) {
    const fs::path dir = fs::temp_directory_path() / "cge_cache_corrupt_test";
    fs::remove_all(dir);
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 1), 0.1, 10, 13);
    SweepOptions o = tight();
    o.cache_dir = dir;
    sweep(f, o);
    const fs::path root = cache_path(dir, f, o.solve, TriadicCube::root());
    ASSERT_TRUE(fs::exists(root));
    { std::ofstream(root, std::ios::binary | std::ios::trunc) << "junk"; }
    const SweepResult again = sweep(f, o);
    EXPECT_EQ(again.solves_performed, 4);
    fs::remove_all(dir);
}

TEST(Ellipticity, ConstantFieldClosedForms) {
    const std::array<double, 2> d{1.0, 16.0};
    const SweepResult r = sweep(gen_constant(GridSpec::make(2, 3), SymMat::diagonal(d)), tight());
    const EllipticityReport e = ellipticity_constants(r, 0.4, 0.3);
    EXPECT_NEAR(e.Lambda_s, 16.0, 1e-8 * 16);
    EXPECT_NEAR(e.lambda_t, 1.0, 1e-8);
    EXPECT_NEAR(e.theta, 16.0, 1e-8 * 16);
    EXPECT_EQ(e.terms.size(), 4u);
    EXPECT_NEAR(e.c_s, 1 - std::pow(3.0, -0.4), 1e-15);
}

TEST(Ellipticity, RejectsExponentsOutsideUnitInterval) {
    const SweepResult r = sweep(gen_constant(GridSpec::make(1, 1), SymMat::identity(1)), tight());
    EXPECT_THROW(ellipticity_constants(r, 0.0, 0.5), RangeError);
    EXPECT_THROW(ellipticity_constants(r, 0.5, 1.0), RangeError);
}

TEST(Ellipticity, ThetaIsScaleInvariant) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 1e-2, 1e2, 31);
    const auto a = ellipticity_constants(sweep(f, tight()), 0.3, 0.6);
    const auto b = ellipticity_constants(sweep(f.scaled(7.5), tight()), 0.3, 0.6);
    EXPECT_NEAR(b.theta / a.theta, 1.0, 1e-8);
    EXPECT_NEAR(b.Lambda_s / a.Lambda_s, 7.5, 1e-8 * 7.5);
    EXPECT_NEAR(b.lambda_t / a.lambda_t, 7.5, 1e-8 * 7.5);
}

TEST(Ellipticity, SubcubeConstants) {
    const SweepResult r = sweep(gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 14), tight());
    const auto e = ellipticity_constants(r, TriadicCube{-1, {0, 2, 0}}, 0.5, 0.5);
    EXPECT_EQ(e.terms.size(), 2u);
    EXPECT_GE(e.theta, 1.0);
}

TEST(Ellipticity, IncompleteSweepIsRejected) {
    SweepResult r = sweep(gen_constant(GridSpec::make(1, 1), SymMat::identity(1)), tight());
    r.failures.push_back({TriadicCube::root(), "boom"});
    EXPECT_THROW(ellipticity_constants(r, 0.5, 0.5), Error);
}

TEST(Audit, RandomFieldsHaveNoViolations) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const AuditReport a = audit(sweep(gen_random_spd(GridSpec::make(2, 2), 1e-3, 1e3, seed), tight()));
        EXPECT_TRUE(a.ok()) << a.violations.front().check;
        EXPECT_GT(a.checks, 100);
        EXPECT_LT(a.max_excess, 0.0);
    }
}

TEST(Audit, DetectsBrokenOrdering) {
    SweepResult r = sweep(gen_random_spd(GridSpec::make(2, 1), 0.1, 10, 3), tight());
    r.levels[0][0].astar = r.levels[0][0].amax * 2.0;
    const AuditReport a = audit(r);
    ASSERT_FALSE(a.ok());
    EXPECT_EQ(a.violations.front().check, "a_* <= a");
}

}  // namespace
