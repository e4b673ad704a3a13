#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "cge/error.hpp"
#include "cge/sym_mat.hpp"

namespace {

using cge::SymMat;

TEST(SymMat, StorageOrderIsUpperTriangleRowMajor) {
    const std::array<double, 6> c{1, 2, 3, 4, 5, 6};
    const SymMat m = SymMat::from_components(3, c);
    EXPECT_EQ(m(0, 1), 2);
    EXPECT_EQ(m(1, 0), 2);
    EXPECT_EQ(m(0, 2), 3);
    EXPECT_EQ(m(1, 1), 4);
    EXPECT_EQ(m(2, 1), 5);
    EXPECT_EQ(m(2, 2), 6);
}

TEST(SymMat, FromFullRejectsAsymmetric) {
    const std::array<double, 4> rows{1, 2, 2.5, 1};
    EXPECT_THROW(SymMat::from_full(2, rows), cge::ValidationError);
    const std::array<double, 4> ok{1, 2, 2, 1};
    EXPECT_NO_THROW(SymMat::from_full(2, ok));
}

TEST(SymMat, InverseOfTwoByTwo) {
    const std::array<double, 3> c{2, 1, 3};
    const SymMat inv = SymMat::from_components(2, c).inverse();
    // [[2,1],[1,3]]^{-1} = [[3,-1],[-1,2]] / 5
    EXPECT_NEAR(inv(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(inv(0, 1), -0.2, 1e-15);
    EXPECT_NEAR(inv(1, 1), 0.4, 1e-15);
}

TEST(SymMat, InverseTimesMatrixIsIdentity3d) {
    const std::array<double, 6> c{4, 1, 0.5, 3, -0.25, 2};
    const SymMat a = SymMat::from_components(3, c);
    const SymMat inv = a.inverse();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int k = 0; k < 3; ++k) acc += a(i, k) * inv(k, j);
            EXPECT_NEAR(acc, i == j ? 1.0 : 0.0, 1e-14);
        }
    }
}

TEST(SymMat, SingularInverseThrows) {
    const std::array<double, 3> c{1, 1, 1};
    EXPECT_THROW(SymMat::from_components(2, c).inverse(), cge::DegenerateFieldError);
}

TEST(SymMat, EigenvaluesAscending) {
    const std::array<double, 3> c{2, 1, 2};
    const auto ev = SymMat::from_components(2, c).eigenvalues();
    EXPECT_NEAR(ev[0], 1.0, 1e-14);
    EXPECT_NEAR(ev[1], 3.0, 1e-14);
}

TEST(SymMat, EigenvaluesOfRotatedDiagonal3d) {
    // R diag(1,5,9) R^T with R a rotation about the z axis by 30 degrees.
    const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
    SymMat m(3);
    m.set(0, 0, c * c * 1 + s * s * 5);
    m.set(0, 1, c * s * (1 - 5));
    m.set(1, 1, s * s * 1 + c * c * 5);
    m.set(2, 2, 9);
    const auto ev = m.eigenvalues();
    EXPECT_NEAR(ev[0], 1, 1e-13);
    EXPECT_NEAR(ev[1], 5, 1e-13);
    EXPECT_NEAR(ev[2], 9, 1e-13);
    EXPECT_NEAR(m.norm(), 9, 1e-13);
}

TEST(SymMat, ArithmeticAndForms) {
    const SymMat a = SymMat::identity(2) * 3.0;
    const std::array<double, 2> x{1, 2};
    EXPECT_DOUBLE_EQ(a.quadratic(x), 15.0);
    const SymMat b = a - SymMat::identity(2);
    EXPECT_DOUBLE_EQ(b(1, 1), 2.0);
    EXPECT_TRUE(b.is_diagonal());
}

TEST(SymMat, LoewnerExcessSign) {
    const std::array<double, 2> d1{1, 2};
    const std::array<double, 2> d2{2, 3};
    const SymMat a = SymMat::diagonal(d1);
    const SymMat b = SymMat::diagonal(d2);
    EXPECT_LT(cge::loewner_excess(a, b), 0.0);
    EXPECT_GT(cge::loewner_excess(b, a), 0.0);
}

TEST(SymMat, SymmetrizeAveragesOffDiagonal) {
    const std::array<double, 4> rows{1, 4, 0, 2};
    const SymMat m = cge::symmetrize(2, rows);
    EXPECT_DOUBLE_EQ(m(0, 1), 2.0);
}

}  // namespace
