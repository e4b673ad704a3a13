#include "cge/sym_mat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cge/error.hpp"

namespace cge {

namespace {

using Full = std::array<std::array<double, kMaxDim>, kMaxDim>;

Full to_full(const SymMat& m) {
    Full a{};
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) {
            a[i][j] = m(i, j);
        }
    }
    return a;
}

// Cyclic Jacobi sweeps; d <= 3 converges in a handful of sweeps.
std::array<double, kMaxDim> jacobi_eigenvalues(Full a, int n) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag += a[i][i] * a[i][i];
            for (int j = i + 1; j < n; ++j) {
                off += a[i][j] * a[i][j];
            }
        }
        if (off <= 1e-34 * diag || off == 0.0) {
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, kMaxDim> ev{};
    for (int i = 0; i < n; ++i) {
        ev[i] = a[i][i];
    }
    std::sort(ev.begin(), ev.begin() + n);
    return ev;
}

}  // namespace

SymMat::SymMat(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw RangeError("matrix dimension must be in 1..3, got " + std::to_string(dim));
    }
}

SymMat SymMat::identity(int dim) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) {
        m.set(i, i, 1.0);
    }
    return m;
}

SymMat SymMat::diagonal(std::span<const double> diag) {
    SymMat m(static_cast<int>(diag.size()));
    for (int i = 0; i < m.dim(); ++i) {
        m.set(i, i, diag[i]);
    }
    return m;
}

SymMat SymMat::from_components(int dim, std::span<const double> comps) {
    SymMat m(dim);
    if (comps.size() != m.size()) {
        throw ValidationError("expected " + std::to_string(m.size()) + " matrix components, got " +
                              std::to_string(comps.size()));
    }
    std::copy(comps.begin(), comps.end(), m.c_.begin());
    return m;
}

SymMat SymMat::from_full(int dim, std::span<const double> rows, double tol) {
    SymMat m(dim);
    if (rows.size() != static_cast<std::size_t>(dim * dim)) {
        throw ValidationError("expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                              " matrix");
    }
    double scale = 0.0;
    for (double v : rows) {
        scale = std::max(scale, std::abs(v));
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            if (std::abs(rows[i * dim + j] - rows[j * dim + i]) > tol * std::max(scale, 1.0)) {
                throw ValidationError("matrix is not symmetric at entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            m.set(i, j, rows[i * dim + j]);
        }
    }
    return m;
}

std::size_t SymMat::index(int i, int j) const {
    if (i > j) {
        std::swap(i, j);
    }
    return static_cast<std::size_t>(offset(dim_, i) + (j - i));
}

SymMat& SymMat::operator+=(const SymMat& o) {
    for (std::size_t k = 0; k < size(); ++k) {
        c_[k] += o.c_[k];
    }
    return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
    for (std::size_t k = 0; k < size(); ++k) {
        c_[k] -= o.c_[k];
    }
    return *this;
}

SymMat& SymMat::operator*=(double s) {
    for (std::size_t k = 0; k < size(); ++k) {
        c_[k] *= s;
    }
    return *this;
}

void SymMat::apply(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < dim_; ++j) {
            acc += (*this)(i, j) * x[j];
        }
        out[i] = acc;
    }
}

double SymMat::form(std::span<const double> x, std::span<const double> y) const {
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            acc += x[i] * (*this)(i, j) * y[j];
        }
    }
    return acc;
}

SymMat SymMat::inverse() const {
    const double scale = max_abs();
    SymMat inv(dim_);
    double det = 0.0;
    if (dim_ == 1) {
        det = c_[0];
        inv.c_[0] = 1.0 / det;
    } else if (dim_ == 2) {
        const double a = (*this)(0, 0), b = (*this)(0, 1), d = (*this)(1, 1);
        det = a * d - b * b;
        inv.set(0, 0, d / det);
        inv.set(0, 1, -b / det);
        inv.set(1, 1, a / det);
    } else {
        const double a = (*this)(0, 0), b = (*this)(0, 1), c = (*this)(0, 2);
        const double d = (*this)(1, 1), e = (*this)(1, 2), f = (*this)(2, 2);
        const double A = d * f - e * e;
        const double B = -(b * f - c * e);
        const double C = b * e - c * d;
        det = a * A + b * B + c * C;
        inv.set(0, 0, A / det);
        inv.set(0, 1, B / det);
        inv.set(0, 2, C / det);
        inv.set(1, 1, (a * f - c * c) / det);
        inv.set(1, 2, -(a * e - b * c) / det);
        inv.set(2, 2, (a * d - b * b) / det);
    }
    if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-15 * std::pow(scale, dim_)) ||
        !inv.is_finite()) {
        throw DegenerateFieldError("singular matrix (det = " + std::to_string(det) + ")");
    }
    return inv;
}

std::array<double, kMaxDim> SymMat::eigenvalues() const {
    return jacobi_eigenvalues(to_full(*this), dim_);
}

double SymMat::min_eigenvalue() const { return eigenvalues()[0]; }

double SymMat::max_eigenvalue() const { return eigenvalues()[static_cast<std::size_t>(dim_ - 1)]; }

double SymMat::norm() const {
    const auto ev = eigenvalues();
    return std::max(std::abs(ev[0]), std::abs(ev[static_cast<std::size_t>(dim_ - 1)]));
}

double SymMat::max_abs() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        m = std::max(m, std::abs(c_[k]));
    }
    return m;
}

bool SymMat::is_diagonal() const {
    for (int i = 0; i < dim_; ++i) {
        for (int j = i + 1; j < dim_; ++j) {
            if ((*this)(i, j) != 0.0) {
                return false;
            }
        }
    }
    return true;
}

bool SymMat::is_finite() const {
    for (std::size_t k = 0; k < size(); ++k) {
        if (!std::isfinite(c_[k])) {
            return false;
        }
    }
    return true;
}

SymMat symmetrize(int dim, std::span<const double> rows) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            m.set(i, j, 0.5 * (rows[i * dim + j] + rows[j * dim + i]));
        }
    }
    return m;
}

double loewner_excess(const SymMat& a, const SymMat& b) { return (a - b).max_eigenvalue(); }

}  // namespace cge
