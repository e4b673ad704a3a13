#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cge/error.hpp"
#include "cge/triadic_grid.hpp"

namespace {

using namespace cge;

TEST(TriadicGrid, Powers) {
    EXPECT_EQ(ipow3(0), 1);
    EXPECT_EQ(ipow3(5), 243);
    const GridSpec g = GridSpec::make(2, 5);
    EXPECT_EQ(g.cells_per_side(), 243);
    EXPECT_EQ(g.cell_count(), 243 * 243);
    EXPECT_DOUBLE_EQ(g.cell_size(), 1.0 / 243);
}

TEST(TriadicGrid, RejectsBadSpec) {
    EXPECT_THROW(GridSpec::make(0, 2), RangeError);
    EXPECT_THROW(GridSpec::make(4, 2), RangeError);
    EXPECT_THROW(GridSpec::make(2, -1), RangeError);
}

TEST(TriadicGrid, CentredCoordinates) {
    const GridSpec g = GridSpec::make(2, 2);
    EXPECT_DOUBLE_EQ(g.centered_coordinate(0), -0.5);
    EXPECT_DOUBLE_EQ(g.centered_coordinate(9), 0.5);
    EXPECT_NEAR(g.centered_coordinate(3), -0.5 + 1.0 / 3, 1e-15);
}

TEST(TriadicGrid, LinearRoundTrip) {
    const GridSpec g = GridSpec::make(3, 2);
    for (std::int64_t i = 0; i < g.cell_count(); i += 37) {
        EXPECT_EQ(g.linear(g.unravel(i, 9), 9), i);
    }
    const Index idx{1, 2, 3};
    EXPECT_EQ(g.linear(idx, 9), (1 * 9 + 2) * 9 + 3);
}

TEST(TriadicGrid, PartitionSizesAndOrder) {
    const GridSpec g = GridSpec::make(2, 3);
    for (int k = 0; k >= -3; --k) {
        const auto cubes = partition(g, k);
        ASSERT_EQ(static_cast<std::int64_t>(cubes.size()), ipow3(-2 * k));
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            EXPECT_EQ(cubes[i].linear_offset(g), static_cast<std::int64_t>(i));
            EXPECT_EQ(cubes[i].side_cells(g), ipow3(3 + k));
        }
    }
    EXPECT_THROW(partition(g, 1), RangeError);
    EXPECT_THROW(partition(g, -4), RangeError);
}

TEST(TriadicGrid, ChildrenTileParent) {
    const GridSpec g = GridSpec::make(2, 3);
    const TriadicCube parent{-1, {1, 2, 0}};
    const auto kids = children(g, parent);
    ASSERT_EQ(kids.size(), 9u);
    std::set<std::int64_t> cells;
    for (const auto& c : kids) {
        EXPECT_EQ(c.level, -2);
        for_each_cell(g, c, [&](std::int64_t lin) { cells.insert(lin); });
    }
    std::set<std::int64_t> expected;
    for_each_cell(g, parent, [&](std::int64_t lin) { expected.insert(lin); });
    EXPECT_EQ(cells, expected);
    EXPECT_EQ(static_cast<std::int64_t>(expected.size()), parent.cell_count(g));
}

TEST(TriadicGrid, FinestCubeHasNoChildren) {
    const GridSpec g = GridSpec::make(1, 2);
    EXPECT_THROW(children(g, TriadicCube{-2, {}}), RangeError);
}

TEST(TriadicGrid, ValidateCubeRejectsOffsetsOutside) {
    const GridSpec g = GridSpec::make(2, 2);
    EXPECT_NO_THROW(validate_cube(g, TriadicCube{-1, {2, 2, 0}}));
    EXPECT_THROW(validate_cube(g, TriadicCube{-1, {3, 0, 0}}), RangeError);
    EXPECT_THROW(validate_cube(g, TriadicCube{-3, {0, 0, 0}}), RangeError);
}

TEST(TriadicGrid, SideLength) {
    EXPECT_DOUBLE_EQ(TriadicCube::root().side_length(), 1.0);
    EXPECT_NEAR((TriadicCube{-2, {}}).side_length(), 1.0 / 9, 1e-16);
}

TEST(CoefficientField, RejectsNonFinite) {
    const GridSpec g = GridSpec::make(1, 1);
    std::vector<double> c{1, 2, std::nan("")};
    EXPECT_THROW(CoefficientField(g, c, "x"), ValidationError);
    std::vector<double> short_c{1, 2};
    EXPECT_THROW(CoefficientField(g, short_c, "x"), ValidationError);
}

TEST(CoefficientField, PositiveDefinitenessCheckNamesCell) {
    const GridSpec g = GridSpec::make(1, 1);
    CoefficientField f(g, {1, -1, 2}, "x");
    try {
        f.check_positive_definite();
        FAIL() << "expected DegenerateFieldError";
    } catch (const DegenerateFieldError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(CoefficientField, CubeAverages) {
    const GridSpec g = GridSpec::make(1, 1);
    CoefficientField f(g, {1, 2, 4}, "x");
    EXPECT_NEAR(cube_average(f, TriadicCube::root(), false)(0, 0), 7.0 / 3, 1e-15);
    // harmonic mean: 3 / (1 + 1/2 + 1/4)
    EXPECT_NEAR(1.0 / cube_average(f, TriadicCube::root(), true)(0, 0), 3.0 / 1.75, 1e-15);
}

TEST(CoefficientField, RefinedKeepsAveragesAndScaledScales) {
    const GridSpec g = GridSpec::make(2, 1);
    std::vector<double> c;
    for (int i = 0; i < 9; ++i) {
        c.insert(c.end(), {1.0 + i, 0.1, 2.0});
    }
    const CoefficientField f(g, c, "x");
    const CoefficientField r = f.refined(1);
    EXPECT_EQ(r.grid().level, 2);
    const SymMat a = cube_average(f, TriadicCube::root(), false);
    const SymMat b = cube_average(r, TriadicCube::root(), false);
    EXPECT_NEAR(a(0, 0), b(0, 0), 1e-14);
    EXPECT_NEAR(f.scaled(3.0).cell(4)(0, 0), 15.0, 1e-15);
}

TEST(CoefficientField, HashIgnoresDescriptor) {
    const GridSpec g = GridSpec::make(1, 1);
    const CoefficientField a(g, {1, 2, 3}, "alpha");
    const CoefficientField b(g, {1, 2, 3}, "beta");
    const CoefficientField c(g, {1, 2, 3.0000001}, "alpha");
    EXPECT_EQ(a.content_hash(), b.content_hash());
    EXPECT_NE(a.content_hash(), c.content_hash());
    EXPECT_EQ(a.content_hash_hex().size(), 16u);
}

TEST(ScalarGridFunction, ValidateChecksLength) {
    const GridSpec g = GridSpec::make(2, 1);
    auto u = ScalarGridFunction::zeros(g, TriadicCube::root(), Sampling::nodal);
    EXPECT_EQ(u.point_count(), 16);
    EXPECT_NO_THROW(u.validate());
    u.values.pop_back();
    EXPECT_THROW(u.validate(), ValidationError);
}

}  // namespace
