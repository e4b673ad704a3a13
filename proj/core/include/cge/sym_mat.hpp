#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace cge {

inline constexpr int kMaxDim = 3;

/// Number of stored components of a symmetric d x d matrix.
constexpr std::size_t sym_components(int dim) {
    return static_cast<std::size_t>(dim * (dim + 1) / 2);
}

/// Symmetric matrix of dimension 1..3, stored as its upper triangle in
/// row-major order: (00,01,11) for d = 2, (00,01,02,11,12,22) for d = 3.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int dim);

    static SymMat identity(int dim);
    static SymMat diagonal(std::span<const double> diag);
    /// Upper-triangle components in storage order.
    static SymMat from_components(int dim, std::span<const double> comps);
    /// Full row-major d*d matrix; throws ValidationError if it is not symmetric.
    static SymMat from_full(int dim, std::span<const double> rows, double tol = 1e-12);

    int dim() const { return dim_; }
    std::size_t size() const { return sym_components(dim_); }

    double operator()(int i, int j) const { return c_[index(i, j)]; }
    void set(int i, int j, double v) { c_[index(i, j)] = v; }

    std::span<const double> components() const { return {c_.data(), size()}; }

    SymMat& operator+=(const SymMat& o);
    SymMat& operator-=(const SymMat& o);
    SymMat& operator*=(double s);
    friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
    friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
    friend SymMat operator*(SymMat a, double s) { return a *= s; }
    friend SymMat operator*(double s, SymMat a) { return a *= s; }

    /// Matrix-vector product written into `out` (length dim).
    void apply(std::span<const double> x, std::span<double> out) const;
    /// x . A y
    double form(std::span<const double> x, std::span<const double> y) const;
    double quadratic(std::span<const double> x) const { return form(x, x); }

    /// Inverse via Cholesky-free cofactor formulas. Throws DegenerateFieldError
    /// when the matrix is singular relative to its scale.
    SymMat inverse() const;

    /// Eigenvalues in ascending order (cyclic Jacobi).
    std::array<double, kMaxDim> eigenvalues() const;
    double min_eigenvalue() const;
    double max_eigenvalue() const;
    /// Spectral norm |A| = max |eigenvalue|.
    double norm() const;
    /// Largest absolute entry; used as a scale for tolerances.
    double max_abs() const;

    bool is_positive_definite() const { return min_eigenvalue() > 0.0; }
    bool is_diagonal() const;
    bool is_finite() const;

private:
    static constexpr int offset(int dim, int i) { return i * dim - i * (i - 1) / 2; }
    std::size_t index(int i, int j) const;

    int dim_ = 0;
    std::array<double, sym_components(kMaxDim)> c_{};
};

/// Symmetric part of a full row-major dim x dim matrix.
SymMat symmetrize(int dim, std::span<const double> rows);

/// Largest eigenvalue of (a - b); positive when a is not below b in the Loewner order.
double loewner_excess(const SymMat& a, const SymMat& b);

}  // namespace cge
