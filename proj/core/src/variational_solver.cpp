#include "cge/variational_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cge {

namespace {

struct ReferenceElement {
    int dim = 0;
    int vertices = 0;
    std::vector<double> stiffness;  // [i][j][a][b]: int_ref d_i phi_a d_j phi_b
    std::vector<double> gradient;   // [i][a]: int_ref d_i phi_a

    double k(int i, int j, int a, int b) const {
        return stiffness[static_cast<std::size_t>(((i * dim + j) * vertices + a) * vertices + b)];
    }
    double g(int i, int a) const { return gradient[static_cast<std::size_t>(i * vertices + a)]; }
};

double shape_derivative(int dim, int a, int i, const double* xi) {
    double v = ((a >> i) & 1) ? 1.0 : -1.0;
    for (int k = 0; k < dim; ++k) {
        if (k != i) {
            v *= ((a >> k) & 1) ? xi[k] : 1.0 - xi[k];
        }
    }
    return v;
}

ReferenceElement build_reference(int dim) {
    ReferenceElement ref;
    ref.dim = dim;
    ref.vertices = 1 << dim;
    const int nv = ref.vertices;
    ref.stiffness.assign(static_cast<std::size_t>(dim * dim * nv * nv), 0.0);
    ref.gradient.assign(static_cast<std::size_t>(dim * nv), 0.0);
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const int npts = 1 << dim;
    const double w = 1.0 / npts;
    for (int q = 0; q < npts; ++q) {
        double xi[kMaxDim];
        for (int k = 0; k < dim; ++k) {
            xi[k] = gp[(q >> k) & 1];
        }
        for (int i = 0; i < dim; ++i) {
            for (int a = 0; a < nv; ++a) {
                const double dia = shape_derivative(dim, a, i, xi);
                ref.gradient[static_cast<std::size_t>(i * nv + a)] += w * dia;
                for (int j = 0; j < dim; ++j) {
                    for (int b = 0; b < nv; ++b) {
                        ref.stiffness[static_cast<std::size_t>(((i * dim + j) * nv + a) * nv + b)] +=
                            w * dia * shape_derivative(dim, b, j, xi);
                    }
                }
            }
        }
    }
    return ref;
}

const ReferenceElement& reference_element(int dim) {
    static const ReferenceElement refs[kMaxDim] = {build_reference(1), build_reference(2), build_reference(3)};
    return refs[dim - 1];
}

double power_of(double h, int e) {
    double r = 1.0;
    if (e >= 0) {
        for (int i = 0; i < e; ++i) r *= h;
    } else {
        for (int i = 0; i < -e; ++i) r /= h;
    }
    return r;
}

/// Geometry of the vertex lattice of a cube.
struct CubeNodes {
    int dim;
    std::int64_t m;       // cells per side
    std::int64_t np;      // nodes per side
    std::int64_t count;   // nodes
    std::int64_t cells;   // cells in cube
    Index first;          // first fine cell
    std::int64_t grid_n;  // fine cells per side of the full grid
    double h;

    CubeNodes(const GridSpec& grid, const TriadicCube& cube)
        : dim(grid.dim), m(cube.side_cells(grid)), np(m + 1), count(1), cells(1),
          first(cube.first_cell(grid)), grid_n(grid.cells_per_side()), h(grid.cell_size()) {
        for (int a = 0; a < dim; ++a) {
            count *= np;
            cells *= m;
        }
    }

    Index unravel(std::int64_t lin, std::int64_t per_side) const {
        Index idx{};
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = lin % per_side;
            lin /= per_side;
        }
        return idx;
    }
    std::int64_t node(const Index& local) const {
        std::int64_t lin = 0;
        for (int a = 0; a < dim; ++a) lin = lin * np + local[a];
        return lin;
    }
    std::int64_t global_cell(const Index& local_cell) const {
        std::int64_t lin = 0;
        for (int a = 0; a < dim; ++a) lin = lin * grid_n + first[a] + local_cell[a];
        return lin;
    }
    /// Node index of vertex `a` (bit k = +1 along axis k) of a local cell.
    std::int64_t vertex(const Index& local_cell, int a) const {
        Index v = local_cell;
        for (int k = 0; k < dim; ++k) v[k] += (a >> k) & 1;
        return node(v);
    }
    bool on_boundary(std::int64_t lin) const {
        const Index idx = unravel(lin, np);
        for (int a = 0; a < dim; ++a) {
            if (idx[a] == 0 || idx[a] == m) return true;
        }
        return false;
    }
};

template <class Fn>
void for_each_local_cell(const CubeNodes& g, Fn&& fn) {
    Index local{};
    for (std::int64_t c = 0; c < g.cells; ++c) {
        fn(local);
        for (int a = g.dim - 1; a >= 0; --a) {
            if (++local[a] < g.m) break;
            local[a] = 0;
        }
    }
}

/// Dense 3^d-slot stencil per node, converted to CSR at the end.
struct StencilBuilder {
    const CubeNodes& g;
    int slots;
    std::vector<double> vals;

    explicit StencilBuilder(const CubeNodes& geom)
        : g(geom), slots(static_cast<int>(ipow3(geom.dim))), vals(static_cast<std::size_t>(geom.count * slots), 0.0) {}

    void add(std::int64_t row, std::int64_t col, double v) {
        const Index r = g.unravel(row, g.np);
        const Index c = g.unravel(col, g.np);
        int slot = 0;
        for (int a = 0; a < g.dim; ++a) slot = slot * 3 + static_cast<int>(c[a] - r[a] + 1);
        vals[static_cast<std::size_t>(row * slots + slot)] += v;
    }

    CsrMatrix finish() const {
        CsrMatrix A;
        A.rows = g.count;
        A.row_ptr.reserve(static_cast<std::size_t>(g.count + 1));
        A.row_ptr.push_back(0);
        for (std::int64_t row = 0; row < g.count; ++row) {
            const Index r = g.unravel(row, g.np);
            for (int slot = 0; slot < slots; ++slot) {
                Index c = r;
                int rem = slot;
                bool valid = true;
                for (int a = g.dim - 1; a >= 0; --a) {
                    c[a] += rem % 3 - 1;
                    rem /= 3;
                    if (c[a] < 0 || c[a] >= g.np) valid = false;
                }
                if (!valid) continue;
                A.cols.push_back(g.node(c));
                A.vals.push_back(vals[static_cast<std::size_t>(row * slots + slot)]);
            }
            A.row_ptr.push_back(static_cast<std::int64_t>(A.cols.size()));
        }
        return A;
    }
};

void element_matrix(const ReferenceElement& ref, const SymMat& a, double scale, std::vector<double>& ke) {
    const int nv = ref.vertices;
    ke.assign(static_cast<std::size_t>(nv * nv), 0.0);
    for (int i = 0; i < ref.dim; ++i) {
        for (int j = 0; j < ref.dim; ++j) {
            const double aij = a(i, j) * scale;
            if (aij == 0.0) continue;
            for (int x = 0; x < nv; ++x) {
                for (int y = 0; y < nv; ++y) {
                    ke[static_cast<std::size_t>(x * nv + y)] += aij * ref.k(i, j, x, y);
                }
            }
        }
    }
}

void assemble_q1(const CoefficientField& field, const CubeNodes& g, StencilBuilder& sb) {
    const ReferenceElement& ref = reference_element(g.dim);
    const double scale = power_of(g.h, g.dim - 2);
    std::vector<double> ke;
    std::int64_t nodes[1 << kMaxDim];
    for_each_local_cell(g, [&](const Index& lc) {
        element_matrix(ref, field.cell(g.global_cell(lc)), scale, ke);
        for (int a = 0; a < ref.vertices; ++a) nodes[a] = g.vertex(lc, a);
        for (int a = 0; a < ref.vertices; ++a) {
            for (int b = 0; b < ref.vertices; ++b) {
                sb.add(nodes[a], nodes[b], ke[static_cast<std::size_t>(a * ref.vertices + b)]);
            }
        }
    });
}

void assemble_fd5(const CoefficientField& field, const CubeNodes& g, StencilBuilder& sb) {
    const double scale = power_of(g.h, g.dim - 2);
    const double full = static_cast<double>(1 << (g.dim - 1));
    for (int axis = 0; axis < g.dim; ++axis) {
        for (std::int64_t n = 0; n < g.count; ++n) {
            const Index ni = g.unravel(n, g.np);
            if (ni[axis] >= g.m) continue;
            // Cells sharing the edge n -> n + e_axis.
            int count = 0;
            double inv_sum = 0.0;
            const int others = g.dim - 1;
            for (int mask = 0; mask < (1 << others); ++mask) {
                Index cell{};
                bool valid = true;
                int bit = 0;
                for (int a = 0; a < g.dim; ++a) {
                    if (a == axis) {
                        cell[a] = ni[a];
                        continue;
                    }
                    cell[a] = ni[a] - 1 + ((mask >> bit) & 1);
                    ++bit;
                    if (cell[a] < 0 || cell[a] >= g.m) valid = false;
                }
                if (!valid) continue;
                ++count;
                inv_sum += 1.0 / field.cell(g.global_cell(cell))(axis, axis);
            }
            const double harmonic = count / inv_sum;
            const double w = scale * (count / full) * harmonic;
            Index nj = ni;
            nj[axis] += 1;
            const std::int64_t n2 = g.node(nj);
            sb.add(n, n, w);
            sb.add(n2, n2, w);
            sb.add(n, n2, -w);
            sb.add(n2, n, -w);
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void remove_mean(std::span<double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

/// Preconditioned CG from the initial guess in x. With `project`, the system
/// is singular with kernel = constants and all iterates stay zero-mean.
SolveStats pcg(const CsrMatrix& A, std::span<const double> b, std::span<double> x, const SolveConfig& cfg,
               bool project) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = b.size();
    SolveStats stats;
    stats.unknowns = static_cast<std::int64_t>(n);
    const double bnorm = std::sqrt(dot(b, b));
    auto finish = [&](double rel) {
        stats.relative_residual = rel;
        stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return stats;
    };
    if (n == 0 || bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return finish(0.0);
    }
    std::vector<double> inv_diag(n, 1.0);
    if (cfg.preconditioner == Preconditioner::diagonal) {
        const auto d = A.diagonal();
        for (std::size_t i = 0; i < n; ++i) inv_diag[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
    }
    const std::int64_t max_iter = cfg.max_iterations(static_cast<std::int64_t>(n));
    std::vector<double> r(n), z(n), p(n), ap(n);
    double rel = 0.0;
    // True residual, and the level below which rounding in b - Ax itself
    // makes it meaningless: a few ulps of |A||x| per row.
    std::int64_t row_nnz = 1;
    for (std::size_t i = 0; i < n; ++i) row_nnz = std::max(row_nnz, A.row_ptr[i + 1] - A.row_ptr[i]);
    double floor = 0.0;
    auto true_residual = [&] {
        if (project) remove_mean(x);
        A.multiply(x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        if (project) remove_mean(r);
        double abs_ax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (auto k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
                acc += std::abs(A.vals[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(A.cols[static_cast<std::size_t>(k)])]);
            }
            abs_ax += acc * acc;
        }
        floor = 4.0 * static_cast<double>(row_nnz) * std::numeric_limits<double>::epsilon() * std::sqrt(abs_ax) / bnorm;
        rel = std::sqrt(dot(r, r)) / bnorm;
    };
    for (int restart = 0; restart < 4; ++restart) {
        true_residual();
        if (rel <= std::max(cfg.cg_rel_tol, floor)) break;
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        if (project) remove_mean(z);
        p = z;
        double rz = dot(r, z);
        // Each restart aims lower so the recursive residual cannot stop short
        // of the true one again.
        const double inner_tol = cfg.cg_rel_tol * std::pow(0.1, restart);
        while (stats.iterations < max_iter) {
            A.multiply(p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) break;
            const double alpha = rz / pap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if (project) remove_mean(r);
            ++stats.iterations;
            rel = std::sqrt(dot(r, r)) / bnorm;
            if (rel <= inner_tol) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            if (project) remove_mean(z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        if (stats.iterations >= max_iter) break;
        // Loop back to compare against the true residual.
    }
    true_residual();
    finish(rel);
    if (rel > std::max(cfg.cg_rel_tol, floor)) {
        std::ostringstream os;
        os << "CG did not converge: relative residual " << rel << " after " << stats.iterations
           << " iterations (tolerance " << cfg.cg_rel_tol << ", rounding floor " << floor << ", " << n
           << " unknowns)";
        throw SolverError(os.str(), stats);
    }
    return stats;
}

void check_config(const CoefficientField& field, const SolveConfig& config) {
    config.validate();
    if (config.discretization == Discretization::fd5 && !field.is_diagonal()) {
        throw ConfigError("FD5 requires a diagonal coefficient field; use q1fem for full matrices");
    }
}

void check_nodal(const GridSpec& grid, const TriadicCube& cube, const ScalarGridFunction& u) {
    u.validate();
    if (u.sampling != Sampling::nodal || u.domain != cube || !(u.grid == grid)) {
        throw ValidationError("expected a nodal function on cube " + cube.id());
    }
}

}  // namespace

std::string to_string(Discretization d) { return d == Discretization::fd5 ? "fd5" : "q1fem"; }
std::string to_string(Preconditioner p) { return p == Preconditioner::diagonal ? "diagonal" : "none"; }

Discretization parse_discretization(const std::string& s) {
    if (s == "fd5" || s == "FD5") return Discretization::fd5;
    if (s == "q1fem" || s == "Q1FEM") return Discretization::q1fem;
    throw ConfigError("unknown discretization '" + s + "'");
}

Preconditioner parse_preconditioner(const std::string& s) {
    if (s == "diagonal") return Preconditioner::diagonal;
    if (s == "none") return Preconditioner::none;
    throw ConfigError("unknown preconditioner '" + s + "'");
}

std::int64_t SolveConfig::max_iterations(std::int64_t unknowns) const {
    if (cg_max_iter) return *cg_max_iter;
    return static_cast<std::int64_t>(50.0 * std::sqrt(static_cast<double>(unknowns))) + 10000;
}

void SolveConfig::validate() const {
    if (!(cg_rel_tol > 0.0)) throw ConfigError("cg_rel_tol must be positive");
    if (cg_max_iter && *cg_max_iter <= 0) throw ConfigError("cg_max_iter must be positive");
}

std::string SolveConfig::key() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(discretization) << ";tol=" << cg_rel_tol << ";max_iter=" << (cg_max_iter ? *cg_max_iter : -1)
       << ";pc=" << to_string(preconditioner);
    return os.str();
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::int64_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const auto end = row_ptr[static_cast<std::size_t>(i + 1)];
        for (auto k = row_ptr[static_cast<std::size_t>(i)]; k < end; ++k) {
            acc += vals[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])];
        }
        y[static_cast<std::size_t>(i)] = acc;
    }
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(rows), 0.0);
    for (std::int64_t i = 0; i < rows; ++i) d[static_cast<std::size_t>(i)] = coeff(i, i);
    return d;
}

double CsrMatrix::coeff(std::int64_t i, std::int64_t j) const {
    for (auto k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i + 1)]; ++k) {
        if (cols[static_cast<std::size_t>(k)] == j) return vals[static_cast<std::size_t>(k)];
    }
    return 0.0;
}

double StiffnessOperator::form(std::span<const double> u, std::span<const double> v) const {
    std::vector<double> av(u.size());
    matrix.multiply(v, av);
    return dot(u, av);
}

StiffnessOperator assemble(const CoefficientField& field, const TriadicCube& cube, const SolveConfig& config) {
    check_config(field, config);
    validate_cube(field.grid(), cube);
    const CubeNodes g(field.grid(), cube);
    StencilBuilder sb(g);
    if (config.discretization == Discretization::q1fem) {
        assemble_q1(field, g, sb);
    } else {
        assemble_fd5(field, g, sb);
    }
    StiffnessOperator op;
    op.grid = field.grid();
    op.cube = cube;
    op.discretization = config.discretization;
    op.nodes_per_side = g.np;
    op.volume = std::pow(cube.side_length(), field.grid().dim);
    op.matrix = sb.finish();
    return op;
}

Solution solve_dirichlet(const CoefficientField& field, const TriadicCube& cube,
                         const ScalarGridFunction& boundary_values, const SolveConfig& config) {
    check_nodal(field.grid(), cube, boundary_values);
    const StiffnessOperator op = assemble(field, cube, config);
    const CubeNodes g(field.grid(), cube);

    std::vector<std::int64_t> unknown(static_cast<std::size_t>(g.count), -1);
    std::int64_t n_int = 0;
    for (std::int64_t i = 0; i < g.count; ++i) {
        if (!g.on_boundary(i)) unknown[static_cast<std::size_t>(i)] = n_int++;
    }
    CsrMatrix A;
    A.rows = n_int;
    A.row_ptr.push_back(0);
    std::vector<double> rhs(static_cast<std::size_t>(n_int), 0.0);
    const auto& K = op.matrix;
    for (std::int64_t i = 0; i < g.count; ++i) {
        const auto ui = unknown[static_cast<std::size_t>(i)];
        if (ui < 0) continue;
        for (auto k = K.row_ptr[static_cast<std::size_t>(i)]; k < K.row_ptr[static_cast<std::size_t>(i + 1)]; ++k) {
            const auto j = K.cols[static_cast<std::size_t>(k)];
            const auto uj = unknown[static_cast<std::size_t>(j)];
            const double v = K.vals[static_cast<std::size_t>(k)];
            if (uj >= 0) {
                A.cols.push_back(uj);
                A.vals.push_back(v);
            } else {
                rhs[static_cast<std::size_t>(ui)] -= v * boundary_values.values[static_cast<std::size_t>(j)];
            }
        }
        A.row_ptr.push_back(static_cast<std::int64_t>(A.cols.size()));
    }
    std::vector<double> x(static_cast<std::size_t>(n_int), 0.0);
    // Warm start from the mean boundary value keeps constants exact.
    double bmean = 0.0;
    std::int64_t nb = 0;
    for (std::int64_t i = 0; i < g.count; ++i) {
        if (unknown[static_cast<std::size_t>(i)] < 0) {
            bmean += boundary_values.values[static_cast<std::size_t>(i)];
            ++nb;
        }
    }
    bmean /= static_cast<double>(std::max<std::int64_t>(nb, 1));
    std::fill(x.begin(), x.end(), bmean);
    SolveStats stats;
    try {
        stats = pcg(A, rhs, x, config, false);
    } catch (const SolverError& e) {
        throw SolverError(std::string("Dirichlet solve on ") + cube.id() + ": " + e.what(), e.stats());
    }

    Solution sol{boundary_values, stats};
    for (std::int64_t i = 0; i < g.count; ++i) {
        const auto ui = unknown[static_cast<std::size_t>(i)];
        if (ui >= 0) sol.u.values[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(ui)];
    }
    return sol;
}

std::vector<double> forcing_vector(const CoefficientField& field, const TriadicCube& cube,
                                   std::span<const double> direction, Forcing kind) {
    const GridSpec& grid = field.grid();
    validate_cube(grid, cube);
    if (static_cast<int>(direction.size()) != grid.dim) {
        throw ValidationError("forcing direction must have d components");
    }
    const CubeNodes g(grid, cube);
    const ReferenceElement& ref = reference_element(grid.dim);
    const double scale = power_of(g.h, grid.dim - 1);
    std::vector<double> f(static_cast<std::size_t>(g.count), 0.0);
    double vec[kMaxDim];
    for_each_local_cell(g, [&](const Index& lc) {
        if (kind == Forcing::flux) {
            field.cell(g.global_cell(lc)).apply(direction, std::span<double>(vec, static_cast<std::size_t>(grid.dim)));
        } else {
            for (int i = 0; i < grid.dim; ++i) vec[i] = direction[static_cast<std::size_t>(i)];
        }
        for (int a = 0; a < ref.vertices; ++a) {
            double acc = 0.0;
            for (int i = 0; i < grid.dim; ++i) acc += vec[i] * ref.g(i, a);
            f[static_cast<std::size_t>(g.vertex(lc, a))] += scale * acc;
        }
    });
    return f;
}

ForcingSolution solve_linear_forcing(const StiffnessOperator& op, const CoefficientField& field,
                                     std::span<const double> direction, Forcing kind, const SolveConfig& config) {
    double norm2 = 0.0;
    for (double v : direction) norm2 += v * v;
    if (!(norm2 > 0.0)) throw ValidationError("forcing direction must be nonzero");
    const TriadicCube& cube = op.cube;
    const std::vector<double> load = forcing_vector(field, cube, direction, kind);
    std::vector<double> rhs = load;
    remove_mean(rhs);  // already orthogonal to constants up to rounding
    std::vector<double> x(rhs.size(), 0.0);
    ForcingSolution sol;
    try {
        sol.stats = pcg(op.matrix, rhs, x, config, true);
    } catch (const SolverError& e) {
        throw SolverError(std::string(kind == Forcing::gradient ? "gradient" : "flux") + " solve on " + cube.id() +
                              ": " + e.what(),
                          e.stats());
    }
    sol.value = dot(load, x) / op.volume;
    sol.u = ScalarGridFunction{field.grid(), cube, Sampling::nodal, std::move(x)};
    return sol;
}

ForcingSolution solve_linear_forcing(const CoefficientField& field, const TriadicCube& cube,
                                     std::span<const double> direction, Forcing kind, const SolveConfig& config) {
    return solve_linear_forcing(assemble(field, cube, config), field, direction, kind, config);
}

double bilinear_form(const CoefficientField& field, const TriadicCube& cube, const ScalarGridFunction& u,
                     const ScalarGridFunction& v, Discretization discretization) {
    check_nodal(field.grid(), cube, u);
    check_nodal(field.grid(), cube, v);
    const CubeNodes g(field.grid(), cube);
    const double vol = std::pow(cube.side_length(), field.grid().dim);
    if (discretization == Discretization::fd5) {
        SolveConfig cfg;
        cfg.discretization = Discretization::fd5;
        return assemble(field, cube, cfg).form(u.values, v.values) / vol;
    }
    const ReferenceElement& ref = reference_element(g.dim);
    const double scale = power_of(g.h, g.dim - 2);
    std::vector<double> ke;
    double total = 0.0;
    double ue[1 << kMaxDim], ve[1 << kMaxDim];
    for_each_local_cell(g, [&](const Index& lc) {
        element_matrix(ref, field.cell(g.global_cell(lc)), scale, ke);
        for (int a = 0; a < ref.vertices; ++a) {
            const auto node = static_cast<std::size_t>(g.vertex(lc, a));
            ue[a] = u.values[node];
            ve[a] = v.values[node];
        }
        for (int a = 0; a < ref.vertices; ++a) {
            for (int b = 0; b < ref.vertices; ++b) {
                total += ue[a] * ke[static_cast<std::size_t>(a * ref.vertices + b)] * ve[b];
            }
        }
    });
    return total / vol;
}

double energy(const CoefficientField& field, const TriadicCube& cube, const ScalarGridFunction& u,
              Discretization discretization) {
    return bilinear_form(field, cube, u, u, discretization);
}

std::vector<Vec> discrete_gradient(const ScalarGridFunction& u) {
    if (u.sampling != Sampling::nodal) throw ValidationError("discrete_gradient expects a nodal function");
    u.validate();
    const CubeNodes g(u.grid, u.domain);
    const ReferenceElement& ref = reference_element(g.dim);
    std::vector<Vec> grads;
    grads.reserve(static_cast<std::size_t>(g.cells));
    for_each_local_cell(g, [&](const Index& lc) {
        Vec grad{};
        for (int a = 0; a < ref.vertices; ++a) {
            const double ua = u.values[static_cast<std::size_t>(g.vertex(lc, a))];
            for (int i = 0; i < g.dim; ++i) grad[i] += ua * ref.g(i, a);
        }
        for (int i = 0; i < g.dim; ++i) grad[i] /= g.h;
        grads.push_back(grad);
    });
    return grads;
}

Vec average_gradient(const ScalarGridFunction& u) {
    const auto grads = discrete_gradient(u);
    Vec avg{};
    for (const Vec& gr : grads) {
        for (int i = 0; i < u.grid.dim; ++i) avg[i] += gr[i];
    }
    for (int i = 0; i < u.grid.dim; ++i) avg[i] /= static_cast<double>(grads.size());
    return avg;
}

Vec average_flux(const CoefficientField& field, const ScalarGridFunction& u) {
    const auto grads = discrete_gradient(u);
    const CubeNodes g(u.grid, u.domain);
    Vec avg{};
    std::size_t k = 0;
    double flux[kMaxDim];
    for_each_local_cell(g, [&](const Index& lc) {
        field.cell(g.global_cell(lc))
            .apply(std::span<const double>(grads[k].data(), static_cast<std::size_t>(g.dim)),
                   std::span<double>(flux, static_cast<std::size_t>(g.dim)));
        for (int i = 0; i < g.dim; ++i) avg[i] += flux[i];
        ++k;
    });
    for (int i = 0; i < g.dim; ++i) avg[i] /= static_cast<double>(grads.size());
    return avg;
}

}  // namespace cge
