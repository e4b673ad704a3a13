#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cge/error.hpp"
#include "cge/triadic_grid.hpp"

namespace cge {

/// FD5: vertex-centred (2d+1)-point scheme for diagonal fields, edge
/// conductances are harmonic means of the cells sharing the edge; an M-matrix,
/// so it satisfies the discrete maximum principle.
/// Q1FEM: multilinear elements with exact cell-wise integration of the
/// piecewise-constant (full symmetric) coefficient.
enum class Discretization { fd5, q1fem };
enum class Preconditioner { diagonal, none };

std::string to_string(Discretization d);
std::string to_string(Preconditioner p);
Discretization parse_discretization(const std::string& s);
Preconditioner parse_preconditioner(const std::string& s);

struct SolveConfig {
    Discretization discretization = Discretization::q1fem;
    /// Relative residual target. A true residual already at the rounding level
    /// of b - Ax (a few ulps of |A||x| per row) is accepted as converged.
    double cg_rel_tol = 1e-10;
    /// Defaults to 50 * sqrt(unknowns) + 10^4.
    std::optional<std::int64_t> cg_max_iter;
    Preconditioner preconditioner = Preconditioner::diagonal;

    std::int64_t max_iterations(std::int64_t unknowns) const;
    void validate() const;
    /// Stable text form, used for cache keys and reports.
    std::string key() const;
};

struct SolveStats {
    std::int64_t iterations = 0;
    double relative_residual = 0.0;
    std::int64_t unknowns = 0;
    double wall_seconds = 0.0;
};

/// CG failed to reach the requested tolerance; carries the final statistics.
class SolverError : public Error {
public:
    SolverError(const std::string& what, SolveStats stats) : Error(what), stats_(stats) {}
    const SolveStats& stats() const { return stats_; }

private:
    SolveStats stats_;
};

struct CsrMatrix {
    std::int64_t rows = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int64_t> cols;
    std::vector<double> vals;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    double coeff(std::int64_t i, std::int64_t j) const;
};

/// Discrete bilinear form B(u,v) = sum_cells int grad u . a grad v on the
/// (m+1)^d vertices of a cube, assembled without boundary conditions.
struct StiffnessOperator {
    GridSpec grid;
    TriadicCube cube;
    Discretization discretization = Discretization::q1fem;
    std::int64_t nodes_per_side = 0;
    double volume = 0.0;
    CsrMatrix matrix;

    std::int64_t node_count() const { return matrix.rows; }
    double form(std::span<const double> u, std::span<const double> v) const;
};

StiffnessOperator assemble(const CoefficientField& field, const TriadicCube& cube, const SolveConfig& config);

struct Solution {
    ScalarGridFunction u;
    SolveStats stats;
};

/// -div(a grad u) = 0 in the cube with u = boundary_values on the cube boundary.
/// `boundary_values` is nodal on the same cube; interior entries are ignored.
Solution solve_dirichlet(const CoefficientField& field, const TriadicCube& cube,
                         const ScalarGridFunction& boundary_values, const SolveConfig& config);

/// GRADIENT: L(v) = int q . grad v  (maximizer of b(Q,q));
/// FLUX:     L(v) = int a p . grad v (maximizer of a(Q,p) over all of H^1).
enum class Forcing { gradient, flux };

/// The load vector L(phi_node) for every vertex of the cube.
std::vector<double> forcing_vector(const CoefficientField& field, const TriadicCube& cube,
                                   std::span<const double> direction, Forcing kind);

struct ForcingSolution {
    ScalarGridFunction u;  ///< zero-mean maximizer
    SolveStats stats;
    double value = 0.0;    ///< L(u) / |Q| = sup of the volume-normalized functional
};

/// Pure Neumann problem B(u,v) = L(v), solved by CG in the zero-mean subspace.
ForcingSolution solve_linear_forcing(const CoefficientField& field, const TriadicCube& cube,
                                     std::span<const double> direction, Forcing kind,
                                     const SolveConfig& config);

/// Same, reusing an operator assembled for `cube`.
ForcingSolution solve_linear_forcing(const StiffnessOperator& op, const CoefficientField& field,
                                     std::span<const double> direction, Forcing kind, const SolveConfig& config);

/// Volume-normalized energy B(u,u)/|Q| of a nodal function on `cube`.
double energy(const CoefficientField& field, const TriadicCube& cube, const ScalarGridFunction& u,
              Discretization discretization = Discretization::q1fem);

/// Volume-normalized B(u,v)/|Q|.
double bilinear_form(const CoefficientField& field, const TriadicCube& cube, const ScalarGridFunction& u,
                     const ScalarGridFunction& v, Discretization discretization = Discretization::q1fem);

using Vec = std::array<double, kMaxDim>;

/// Gradient of the multilinear interpolant at each cell centre, cells row-major.
std::vector<Vec> discrete_gradient(const ScalarGridFunction& u);

/// (grad u)_Q and (a grad u)_Q of the multilinear interpolant; exact.
Vec average_gradient(const ScalarGridFunction& u);
Vec average_flux(const CoefficientField& field, const ScalarGridFunction& u);

}  // namespace cge
