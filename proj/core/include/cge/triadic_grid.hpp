#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cge/sym_mat.hpp"

namespace cge {

using Index = std::array<std::int64_t, kMaxDim>;

/// 3^n for n >= 0.
std::int64_t ipow3(int n);

/// Resolution of the fine grid over the unit cube: 3^level cells per side.
///
/// Coordinates are stored in [0,1)^d index space; the centred unit cube
/// (-1/2,1/2)^d is recovered by `centered_coordinate`.
struct GridSpec {
    int dim = 2;
    int level = 1;

    static GridSpec make(int dim, int level);

    std::int64_t cells_per_side() const { return ipow3(level); }
    std::int64_t cell_count() const;
    std::int64_t nodes_per_side() const { return cells_per_side() + 1; }
    double cell_size() const;
    std::size_t matrix_components() const { return sym_components(dim); }

    /// Row-major linear index, last coordinate fastest.
    std::int64_t linear(const Index& idx, std::int64_t per_side) const;
    Index unravel(std::int64_t linear, std::int64_t per_side) const;

    /// Node coordinate in the centred cube (-1/2,1/2)^d.
    double centered_coordinate(std::int64_t node_index) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// The cube offset * 3^level + [0, 3^level)^d inside the unit cube.
struct TriadicCube {
    int level = 0;      ///< -N <= level <= 0
    Index offset{};     ///< position in the level-`level` partition

    static TriadicCube root() { return {}; }

    std::int64_t side_cells(const GridSpec& grid) const { return ipow3(level + grid.level); }
    std::int64_t cubes_per_side() const { return ipow3(-level); }
    /// Linear index of the cube within its level's partition.
    std::int64_t linear_offset(const GridSpec& grid) const;
    /// First fine cell index per axis.
    Index first_cell(const GridSpec& grid) const;
    /// Side length in physical units.
    double side_length() const;
    std::int64_t cell_count(const GridSpec& grid) const;

    std::string id() const;

    friend auto operator<=>(const TriadicCube&, const TriadicCube&) = default;
};

void validate_cube(const GridSpec& grid, const TriadicCube& cube);

/// Non-overlapping partition of the unit cube at `level`, ordered by linear offset.
std::vector<TriadicCube> partition(const GridSpec& grid, int level);

/// The 3^d sub-cubes of `cube` at level - 1.
std::vector<TriadicCube> children(const GridSpec& grid, const TriadicCube& cube);

/// Calls fn(linear fine-cell index) for every fine cell inside `cube`,
/// in row-major order.
template <class Fn>
void for_each_cell(const GridSpec& grid, const TriadicCube& cube, Fn&& fn) {
    const Index first = cube.first_cell(grid);
    const std::int64_t m = cube.side_cells(grid);
    const std::int64_t n = grid.cells_per_side();
    Index local{};
    const std::int64_t total = cube.cell_count(grid);
    for (std::int64_t count = 0; count < total; ++count) {
        std::int64_t lin = 0;
        for (int a = 0; a < grid.dim; ++a) {
            lin = lin * n + first[a] + local[a];
        }
        fn(lin);
        for (int a = grid.dim - 1; a >= 0; --a) {
            if (++local[a] < m) {
                break;
            }
            local[a] = 0;
        }
    }
}

/// Piecewise-constant symmetric matrix field on the fine grid.
///
/// Immutable once built. The constructor rejects non-finite entries; the
/// positive-definiteness invariant is enforced by `check_positive_definite`,
/// which every generator calls.
class CoefficientField {
public:
    CoefficientField(GridSpec grid, std::vector<double> components, std::string descriptor);

    static CoefficientField from_cells(GridSpec grid, std::span<const SymMat> cells,
                                       std::string descriptor);

    const GridSpec& grid() const { return grid_; }
    const std::string& descriptor() const { return descriptor_; }
    std::span<const double> components() const { return components_; }
    SymMat cell(std::int64_t linear) const;

    bool is_diagonal() const { return diagonal_; }
    /// FNV-1a over dimension, level and payload bytes; independent of the descriptor.
    std::uint64_t content_hash() const { return hash_; }
    std::string content_hash_hex() const;

    /// Throws DegenerateFieldError naming the first cell whose smallest eigenvalue is <= 0.
    void check_positive_definite() const;
    /// Smallest and largest cell eigenvalue over the whole field.
    std::pair<double, double> eigenvalue_range() const;

    CoefficientField scaled(double factor) const;
    /// Same field on a grid refined `extra` times (each cell split into 3^{d*extra}).
    CoefficientField refined(int extra) const;

private:
    GridSpec grid_;
    std::vector<double> components_;
    std::string descriptor_;
    bool diagonal_ = true;
    std::uint64_t hash_ = 0;
};

/// Mean of a (or of a^{-1} when `inverted`) over the fine cells of `cube`.
SymMat cube_average(const CoefficientField& field, const TriadicCube& cube, bool inverted);

enum class Sampling { nodal, cell };

/// Real values on a cube of the grid: either at the (m+1)^d vertices or the m^d cells.
struct ScalarGridFunction {
    GridSpec grid;
    TriadicCube domain;
    Sampling sampling = Sampling::cell;
    std::vector<double> values;

    static ScalarGridFunction zeros(const GridSpec& grid, const TriadicCube& domain, Sampling sampling);
    /// Samples fn at node coordinates of `domain` (centred convention).
    static ScalarGridFunction from_nodal_function(const GridSpec& grid, const TriadicCube& domain,
                                                  const std::function<double(std::span<const double>)>& fn);

    std::int64_t points_per_side() const;
    std::int64_t point_count() const;
    /// Throws ValidationError on length mismatch or non-finite entries.
    void validate() const;
    /// Centred physical coordinates of point `linear`.
    std::array<double, kMaxDim> coordinates(std::int64_t linear) const;
};

/// Cell-sampled scalar field holding a copy of one matrix component per cell
/// (component 0 for scalar fields).
ScalarGridFunction scalar_component(const CoefficientField& field, int component = 0);

}  // namespace cge
