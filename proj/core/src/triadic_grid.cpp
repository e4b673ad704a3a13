#include "cge/triadic_grid.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cge/error.hpp"

namespace cge {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xffU;
        h *= kFnvPrime;
    }
}

}  // namespace

std::int64_t ipow3(int n) {
    if (n < 0 || n > 39) {
        throw RangeError("3^n requested for n = " + std::to_string(n));
    }
    std::int64_t r = 1;
    for (int i = 0; i < n; ++i) {
        r *= 3;
    }
    return r;
}

GridSpec GridSpec::make(int dim, int level) {
    if (dim < 1 || dim > kMaxDim) {
        throw RangeError("grid dimension must be in 1..3, got " + std::to_string(dim));
    }
    if (level < 0) {
        throw RangeError("resolution level must be >= 0, got " + std::to_string(level));
    }
    if (dim * level > 24) {
        throw RangeError("grid with 3^" + std::to_string(dim * level) + " cells is too large");
    }
    return GridSpec{dim, level};
}

std::int64_t GridSpec::cell_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim; ++a) {
        n *= cells_per_side();
    }
    return n;
}

double GridSpec::cell_size() const { return 1.0 / static_cast<double>(cells_per_side()); }

std::int64_t GridSpec::linear(const Index& idx, std::int64_t per_side) const {
    std::int64_t lin = 0;
    for (int a = 0; a < dim; ++a) {
        lin = lin * per_side + idx[a];
    }
    return lin;
}

Index GridSpec::unravel(std::int64_t linear, std::int64_t per_side) const {
    Index idx{};
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = linear % per_side;
        linear /= per_side;
    }
    return idx;
}

double GridSpec::centered_coordinate(std::int64_t node_index) const {
    return static_cast<double>(node_index) / static_cast<double>(cells_per_side()) - 0.5;
}

std::int64_t TriadicCube::linear_offset(const GridSpec& grid) const {
    return grid.linear(offset, cubes_per_side());
}

Index TriadicCube::first_cell(const GridSpec& grid) const {
    Index first{};
    const std::int64_t m = side_cells(grid);
    for (int a = 0; a < grid.dim; ++a) {
        first[a] = offset[a] * m;
    }
    return first;
}

double TriadicCube::side_length() const { return 1.0 / static_cast<double>(ipow3(-level)); }

std::int64_t TriadicCube::cell_count(const GridSpec& grid) const {
    std::int64_t n = 1;
    for (int a = 0; a < grid.dim; ++a) {
        n *= side_cells(grid);
    }
    return n;
}

std::string TriadicCube::id() const {
    std::string s = "L" + std::to_string(level) + "[";
    for (int a = 0; a < kMaxDim; ++a) {
        s += std::to_string(offset[a]);
        s += a + 1 < kMaxDim ? "," : "]";
    }
    return s;
}

void validate_cube(const GridSpec& grid, const TriadicCube& cube) {
    if (cube.level > 0 || cube.level < -grid.level) {
        throw RangeError("cube level " + std::to_string(cube.level) + " outside [-" +
                         std::to_string(grid.level) + ", 0]");
    }
    const std::int64_t per_side = cube.cubes_per_side();
    for (int a = 0; a < kMaxDim; ++a) {
        const bool active = a < grid.dim;
        if ((active && (cube.offset[a] < 0 || cube.offset[a] >= per_side)) ||
            (!active && cube.offset[a] != 0)) {
            throw RangeError("cube " + cube.id() + " lies outside the unit cube");
        }
    }
}

std::vector<TriadicCube> partition(const GridSpec& grid, int level) {
    if (level > 0 || level < -grid.level) {
        throw RangeError("partition level " + std::to_string(level) + " outside [-" +
                         std::to_string(grid.level) + ", 0]");
    }
    const std::int64_t per_side = ipow3(-level);
    std::int64_t total = 1;
    for (int a = 0; a < grid.dim; ++a) {
        total *= per_side;
    }
    std::vector<TriadicCube> cubes;
    cubes.reserve(static_cast<std::size_t>(total));
    for (std::int64_t lin = 0; lin < total; ++lin) {
        cubes.push_back(TriadicCube{level, grid.unravel(lin, per_side)});
    }
    return cubes;
}

std::vector<TriadicCube> children(const GridSpec& grid, const TriadicCube& cube) {
    validate_cube(grid, cube);
    if (cube.level - 1 < -grid.level) {
        throw RangeError("cube " + cube.id() + " is already at the finest level");
    }
    std::int64_t count = 1;
    for (int a = 0; a < grid.dim; ++a) {
        count *= 3;
    }
    std::vector<TriadicCube> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t lin = 0; lin < count; ++lin) {
        const Index local = grid.unravel(lin, 3);
        TriadicCube child{cube.level - 1, {}};
        for (int a = 0; a < grid.dim; ++a) {
            child.offset[a] = 3 * cube.offset[a] + local[a];
        }
        out.push_back(child);
    }
    return out;
}

CoefficientField::CoefficientField(GridSpec grid, std::vector<double> components,
                                   std::string descriptor)
    : grid_(GridSpec::make(grid.dim, grid.level)),
      components_(std::move(components)),
      descriptor_(std::move(descriptor)) {
    const std::size_t ncomp = grid_.matrix_components();
    const auto expected = static_cast<std::size_t>(grid_.cell_count()) * ncomp;
    if (components_.size() != expected) {
        throw ValidationError("coefficient payload has " + std::to_string(components_.size()) +
                              " entries, expected " + std::to_string(expected));
    }
    hash_ = kFnvOffset;
    fnv_mix(hash_, static_cast<std::uint64_t>(grid_.dim));
    fnv_mix(hash_, static_cast<std::uint64_t>(grid_.level));
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const double v = components_[k];
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite coefficient in cell " + std::to_string(k / ncomp));
        }
        fnv_mix(hash_, std::bit_cast<std::uint64_t>(v));
    }
    for (std::size_t cell = 0; cell < components_.size() / ncomp && diagonal_; ++cell) {
        for (int i = 0; i < grid_.dim && diagonal_; ++i) {
            for (int j = i + 1; j < grid_.dim; ++j) {
                const auto k = static_cast<std::size_t>(i * grid_.dim - i * (i - 1) / 2 + (j - i));
                if (components_[cell * ncomp + k] != 0.0) {
                    diagonal_ = false;
                    break;
                }
            }
        }
    }
}

CoefficientField CoefficientField::from_cells(GridSpec grid, std::span<const SymMat> cells,
                                              std::string descriptor) {
    const std::size_t ncomp = sym_components(grid.dim);
    std::vector<double> comps;
    comps.reserve(cells.size() * ncomp);
    for (const SymMat& m : cells) {
        if (m.dim() != grid.dim) {
            throw ValidationError("cell matrix dimension does not match grid dimension");
        }
        const auto c = m.components();
        comps.insert(comps.end(), c.begin(), c.end());
    }
    return CoefficientField(grid, std::move(comps), std::move(descriptor));
}

SymMat CoefficientField::cell(std::int64_t linear) const {
    const std::size_t ncomp = grid_.matrix_components();
    return SymMat::from_components(
        grid_.dim, std::span<const double>(components_).subspan(static_cast<std::size_t>(linear) * ncomp, ncomp));
}

std::string CoefficientField::content_hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
}

void CoefficientField::check_positive_definite() const {
    for (std::int64_t c = 0; c < grid_.cell_count(); ++c) {
        const SymMat m = cell(c);
        if (!(m.min_eigenvalue() > 0.0)) {
            throw DegenerateFieldError("cell " + std::to_string(c) +
                                       " is not positive definite (smallest eigenvalue " +
                                       std::to_string(m.min_eigenvalue()) + ")");
        }
    }
}

std::pair<double, double> CoefficientField::eigenvalue_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::int64_t c = 0; c < grid_.cell_count(); ++c) {
        const auto ev = cell(c).eigenvalues();
        lo = std::min(lo, ev[0]);
        hi = std::max(hi, ev[static_cast<std::size_t>(grid_.dim - 1)]);
    }
    return {lo, hi};
}

CoefficientField CoefficientField::scaled(double factor) const {
    std::vector<double> comps(components_);
    for (double& v : comps) {
        v *= factor;
    }
    return CoefficientField(grid_, std::move(comps),
                            descriptor_ + ";scaled=" + std::to_string(factor));
}

CoefficientField CoefficientField::refined(int extra) const {
    const GridSpec fine = GridSpec::make(grid_.dim, grid_.level + extra);
    const std::size_t ncomp = grid_.matrix_components();
    const std::int64_t ratio = ipow3(extra);
    std::vector<double> comps(static_cast<std::size_t>(fine.cell_count()) * ncomp);
    for (std::int64_t c = 0; c < fine.cell_count(); ++c) {
        Index idx = fine.unravel(c, fine.cells_per_side());
        for (int a = 0; a < grid_.dim; ++a) {
            idx[a] /= ratio;
        }
        const std::int64_t coarse = grid_.linear(idx, grid_.cells_per_side());
        for (std::size_t k = 0; k < ncomp; ++k) {
            comps[static_cast<std::size_t>(c) * ncomp + k] = components_[static_cast<std::size_t>(coarse) * ncomp + k];
        }
    }
    return CoefficientField(fine, std::move(comps), descriptor_ + ";refined=" + std::to_string(extra));
}

SymMat cube_average(const CoefficientField& field, const TriadicCube& cube, bool inverted) {
    const GridSpec& grid = field.grid();
    validate_cube(grid, cube);
    SymMat sum(grid.dim);
    for_each_cell(grid, cube, [&](std::int64_t c) {
        const SymMat m = field.cell(c);
        if (inverted) {
            try {
                sum += m.inverse();
            } catch (const DegenerateFieldError&) {
                throw DegenerateFieldError("cannot invert coefficient in cell " + std::to_string(c));
            }
        } else {
            sum += m;
        }
    });
    sum *= 1.0 / static_cast<double>(cube.cell_count(grid));
    return sum;
}

ScalarGridFunction ScalarGridFunction::zeros(const GridSpec& grid, const TriadicCube& domain,
                                             Sampling sampling) {
    validate_cube(grid, domain);
    ScalarGridFunction f{grid, domain, sampling, {}};
    f.values.assign(static_cast<std::size_t>(f.point_count()), 0.0);
    return f;
}

ScalarGridFunction ScalarGridFunction::from_nodal_function(
    const GridSpec& grid, const TriadicCube& domain,
    const std::function<double(std::span<const double>)>& fn) {
    ScalarGridFunction f = zeros(grid, domain, Sampling::nodal);
    for (std::int64_t i = 0; i < f.point_count(); ++i) {
        const auto x = f.coordinates(i);
        f.values[static_cast<std::size_t>(i)] = fn(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
    }
    return f;
}

std::int64_t ScalarGridFunction::points_per_side() const {
    const std::int64_t m = domain.side_cells(grid);
    return sampling == Sampling::nodal ? m + 1 : m;
}

std::int64_t ScalarGridFunction::point_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < grid.dim; ++a) {
        n *= points_per_side();
    }
    return n;
}

void ScalarGridFunction::validate() const {
    validate_cube(grid, domain);
    if (static_cast<std::int64_t>(values.size()) != point_count()) {
        throw ValidationError("grid function has " + std::to_string(values.size()) +
                              " values, expected " + std::to_string(point_count()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ValidationError("non-finite grid function value at index " + std::to_string(i));
        }
    }
}

std::array<double, kMaxDim> ScalarGridFunction::coordinates(std::int64_t linear) const {
    const Index local = grid.unravel(linear, points_per_side());
    const Index first = domain.first_cell(grid);
    const double shift = sampling == Sampling::cell ? 0.5 : 0.0;
    std::array<double, kMaxDim> x{};
    for (int a = 0; a < grid.dim; ++a) {
        x[a] = (static_cast<double>(first[a] + local[a]) + shift) * grid.cell_size() - 0.5;
    }
    return x;
}

ScalarGridFunction scalar_component(const CoefficientField& field, int component) {
    ScalarGridFunction f = ScalarGridFunction::zeros(field.grid(), TriadicCube::root(), Sampling::cell);
    const std::size_t ncomp = field.grid().matrix_components();
    const auto comps = field.components();
    for (std::size_t c = 0; c < f.values.size(); ++c) {
        f.values[c] = comps[c * ncomp + static_cast<std::size_t>(component)];
    }
    return f;
}

}  // namespace cge
