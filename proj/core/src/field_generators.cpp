#include "cge/field_generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cge/error.hpp"
#include "cge/rng.hpp"

namespace cge {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::int64_t cell_axis_index(const GridSpec& grid, std::int64_t linear, int axis) {
    return grid.unravel(linear, grid.cells_per_side())[static_cast<std::size_t>(axis)];
}

}  // namespace

double LayeredParams::amplitude(int k) const { return std::pow(3.0, static_cast<double>(k) * k); }

double LayeredParams::interval_length(int k) const {
    return std::pow(3.0, (alpha - 1.0) * k - static_cast<double>(k) * k);
}

double LayeredParams::spike_mass(int k) const { return std::pow(3.0, -(1.0 - alpha) * k); }

double LayeredParams::total_mass() const {
    double sum = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        sum += spike_mass(k);
    }
    return sum;
}

void LayeredParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("layered example needs alpha in (0,1), got " + fmt_double(alpha));
    }
    if (k_max < 0) {
        throw ValidationError("layered example needs k_max >= 0");
    }
}

double CantorParams::hausdorff_dimension(int dim) const {
    return dim * std::log(static_cast<double>(retained.size())) / std::log(3.0);
}

void CantorParams::validate(int dim) const {
    if (generation < 0) {
        throw ValidationError("Cantor generation must be >= 0");
    }
    if (retained.empty() || retained.size() > 3) {
        throw ValidationError("Cantor construction needs 1..3 retained digits");
    }
    for (std::size_t i = 0; i < retained.size(); ++i) {
        if (retained[i] < 0 || retained[i] > 2) {
            throw ValidationError("retained digits must be 0, 1 or 2");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (retained[i] == retained[j]) {
                throw ValidationError("retained digits must be distinct");
            }
        }
    }
    const double alpha = hausdorff_dimension(dim);
    if (!(alpha > dim - 2.0 && alpha < dim)) {
        throw ValidationError("Cantor dimension " + fmt_double(alpha) + " outside (d-2, d)");
    }
}

double CascadeParams::level_variance() { return std::log(3.0); }

void CascadeParams::validate(int dim) const {
    if (!(gamma >= 0.0 && gamma < std::sqrt(2.0 * dim))) {
        throw ValidationError("cascade intermittency gamma must lie in [0, sqrt(2d)), got " +
                              fmt_double(gamma));
    }
    if (generation < 0) {
        throw ValidationError("cascade generation must be >= 0");
    }
}

CoefficientField gen_constant(const GridSpec& grid, const SymMat& matrix) {
    if (matrix.dim() != grid.dim) {
        throw ValidationError("matrix dimension does not match grid dimension");
    }
    if (!matrix.is_finite() || !matrix.is_positive_definite()) {
        throw ValidationError("constant field matrix must be symmetric positive definite");
    }
    const std::size_t n = static_cast<std::size_t>(grid.cell_count());
    std::vector<double> comps;
    comps.reserve(n * matrix.size());
    for (std::size_t c = 0; c < n; ++c) {
        comps.insert(comps.end(), matrix.components().begin(), matrix.components().end());
    }
    std::string desc = "constant(d=" + std::to_string(grid.dim) + ",N=" + std::to_string(grid.level) + ",a=";
    for (std::size_t k = 0; k < matrix.size(); ++k) {
        desc += (k ? ":" : "") + fmt_double(matrix.components()[k]);
    }
    return CoefficientField(grid, std::move(comps), desc + ")");
}

CoefficientField gen_laminate(const GridSpec& grid, int axis, const std::vector<double>& values) {
    if (axis < 0 || axis >= grid.dim) {
        throw ValidationError("laminate axis out of range");
    }
    if (values.empty()) {
        throw ValidationError("laminate needs at least one stripe value");
    }
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError("laminate stripe values must be positive and finite");
        }
    }
    const std::int64_t n = grid.cells_per_side();
    const auto stripes = static_cast<std::int64_t>(values.size());
    // Cell i covers [i/n, (i+1)/n); stripe j covers [j/S, (j+1)/S). Work in units of 1/(n S).
    std::vector<double> profile(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t lo = i * stripes;
        const std::int64_t hi = (i + 1) * stripes;
        double acc = 0.0;
        for (std::int64_t j = lo / n; j < stripes && j * n < hi; ++j) {
            const std::int64_t overlap = std::min(hi, (j + 1) * n) - std::max(lo, j * n);
            if (overlap > 0) {
                acc += static_cast<double>(overlap) * values[static_cast<std::size_t>(j)];
            }
        }
        profile[static_cast<std::size_t>(i)] = acc / static_cast<double>(stripes);
    }
    std::vector<double> comps(static_cast<std::size_t>(grid.cell_count()) * grid.matrix_components(), 0.0);
    const std::size_t ncomp = grid.matrix_components();
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        const double v = profile[static_cast<std::size_t>(cell_axis_index(grid, c, axis))];
        for (int i = 0; i < grid.dim; ++i) {
            comps[static_cast<std::size_t>(c) * ncomp + static_cast<std::size_t>(i * grid.dim - i * (i - 1) / 2)] = v;
        }
    }
    std::string desc = "laminate(d=" + std::to_string(grid.dim) + ",N=" + std::to_string(grid.level) +
                       ",axis=" + std::to_string(axis) + ",values=";
    for (std::size_t k = 0; k < values.size(); ++k) {
        desc += (k ? ":" : "") + fmt_double(values[k]);
    }
    return CoefficientField(grid, std::move(comps), desc + ")");
}

ScalarGridFunction layered_density(const GridSpec& grid, const LayeredParams& params) {
    params.validate();
    const double h = grid.cell_size();
    if (params.k_max > 0) {
        const double shortest = params.interval_length(params.k_max);
        if (shortest < h * (1.0 - 1e-12)) {
            throw ResolutionError("spike k=" + std::to_string(params.k_max) + " has width " +
                                  fmt_double(shortest) + " below the cell size " + fmt_double(h) +
                                  "; increase N or decrease k_max");
        }
    }
    const std::int64_t n = grid.cells_per_side();
    std::vector<double> profile(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k <= params.k_max; ++k) {
        const double len = params.interval_length(k);
        const double density = params.spike_mass(k) / h;  // A_k * l_k / h
        for (std::int64_t i = 0; i < n; ++i) {
            const double lo = static_cast<double>(i) * h;
            if (lo >= len) {
                break;
            }
            const double overlap = std::min(len, lo + h) - lo;
            profile[static_cast<std::size_t>(i)] += density * (overlap / len);
        }
    }
    ScalarGridFunction f = ScalarGridFunction::zeros(grid, TriadicCube::root(), Sampling::cell);
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        f.values[static_cast<std::size_t>(c)] = profile[static_cast<std::size_t>(cell_axis_index(grid, c, 0))];
    }
    return f;
}

CoefficientField gen_layered_example(const GridSpec& grid, const LayeredParams& params) {
    return unit_shifted(layered_density(grid, params),
                        "layered(d=" + std::to_string(grid.dim) + ",N=" + std::to_string(grid.level) +
                            ",alpha=" + fmt_double(params.alpha) + ",k_max=" + std::to_string(params.k_max) + ")");
}

ScalarGridFunction cantor_density(const GridSpec& grid, const CantorParams& params) {
    params.validate(grid.dim);
    const int n = params.generation;
    if (n > grid.level) {
        throw ResolutionError("Cantor generation " + std::to_string(n) + " exceeds grid level " +
                              std::to_string(grid.level));
    }
    const double per_axis = 3.0 / static_cast<double>(params.retained.size());
    const double peak = std::pow(per_axis, static_cast<double>(n * grid.dim));
    const std::int64_t block = ipow3(grid.level - n);
    std::vector<bool> keep_digit(3, false);
    for (int r : params.retained) {
        keep_digit[static_cast<std::size_t>(r)] = true;
    }
    ScalarGridFunction f = ScalarGridFunction::zeros(grid, TriadicCube::root(), Sampling::cell);
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        const Index idx = grid.unravel(c, grid.cells_per_side());
        bool survives = true;
        for (int a = 0; a < grid.dim && survives; ++a) {
            std::int64_t j = idx[a] / block;
            for (int digit = 0; digit < n; ++digit) {
                if (!keep_digit[static_cast<std::size_t>(j % 3)]) {
                    survives = false;
                    break;
                }
                j /= 3;
            }
        }
        f.values[static_cast<std::size_t>(c)] = survives ? peak : 0.0;
    }
    return f;
}

CoefficientField gen_cantor_field(const GridSpec& grid, const CantorParams& params) {
    std::string digits;
    for (std::size_t k = 0; k < params.retained.size(); ++k) {
        digits += (k ? ":" : "") + std::to_string(params.retained[k]);
    }
    return unit_shifted(cantor_density(grid, params),
                        "cantor(d=" + std::to_string(grid.dim) + ",N=" + std::to_string(grid.level) +
                            ",n=" + std::to_string(params.generation) + ",retained=" + digits + ")");
}

ScalarGridFunction cascade_density(const GridSpec& grid, const CascadeParams& params) {
    params.validate(grid.dim);
    const int n = params.generation;
    if (n > grid.level) {
        throw ResolutionError("cascade generation " + std::to_string(n) + " exceeds grid level " +
                              std::to_string(grid.level));
    }
    const CounterRng rng(params.seed);
    const double v = CascadeParams::level_variance();
    const double sd = std::sqrt(v);
    const double drift = 0.5 * params.gamma * params.gamma * v;

    // Multipliers for every triadic cell of every level 1..n, then one product per fine cell.
    std::vector<std::vector<double>> multipliers(static_cast<std::size_t>(n) + 1);
    for (int level = 1; level <= n; ++level) {
        const GridSpec coarse{grid.dim, level};
        auto& w = multipliers[static_cast<std::size_t>(level)];
        w.resize(static_cast<std::size_t>(coarse.cell_count()));
        for (std::int64_t c = 0; c < coarse.cell_count(); ++c) {
            const double g = sd * rng.normal(static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(c));
            w[static_cast<std::size_t>(c)] = std::exp(params.gamma * g - drift);
        }
    }
    ScalarGridFunction f = ScalarGridFunction::zeros(grid, TriadicCube::root(), Sampling::cell);
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        const Index idx = grid.unravel(c, grid.cells_per_side());
        double density = 1.0;
        for (int level = 1; level <= n; ++level) {
            const GridSpec coarse{grid.dim, level};
            const std::int64_t block = ipow3(grid.level - level);
            Index parent{};
            for (int a = 0; a < grid.dim; ++a) {
                parent[a] = idx[a] / block;
            }
            density *= multipliers[static_cast<std::size_t>(level)][static_cast<std::size_t>(
                coarse.linear(parent, coarse.cells_per_side()))];
        }
        f.values[static_cast<std::size_t>(c)] = density;
    }
    return f;
}

CoefficientField gen_cascade_field(const GridSpec& grid, const CascadeParams& params) {
    return unit_shifted(cascade_density(grid, params),
                        "cascade(d=" + std::to_string(grid.dim) + ",N=" + std::to_string(grid.level) +
                            ",gamma=" + fmt_double(params.gamma) + ",n=" + std::to_string(params.generation) +
                            ",seed=" + std::to_string(params.seed) + ")");
}

CoefficientField unit_shifted(const ScalarGridFunction& density, std::string descriptor) {
    density.validate();
    if (density.sampling != Sampling::cell || density.domain != TriadicCube::root()) {
        throw ValidationError("unit_shifted expects a cell-sampled function on the whole domain");
    }
    const GridSpec& grid = density.grid;
    const std::size_t ncomp = grid.matrix_components();
    std::vector<double> comps(density.values.size() * ncomp, 0.0);
    for (std::size_t c = 0; c < density.values.size(); ++c) {
        const double v = 1.0 + density.values[c];
        if (!(v > 0.0)) {
            throw ValidationError("shifted density is not positive in cell " + std::to_string(c));
        }
        for (int i = 0; i < grid.dim; ++i) {
            comps[c * ncomp + static_cast<std::size_t>(i * grid.dim - i * (i - 1) / 2)] = v;
        }
    }
    CoefficientField field(grid, std::move(comps), std::move(descriptor));
    field.check_positive_definite();
    return field;
}

CoefficientField gen_random_spd(const GridSpec& grid, double lo, double hi, std::uint64_t seed,
                                bool diagonal) {
    if (!(lo > 0.0 && hi >= lo)) {
        throw ValidationError("random SPD field needs 0 < lo <= hi");
    }
    const CounterRng rng(seed);
    const int d = grid.dim;
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    std::vector<SymMat> cells;
    cells.reserve(static_cast<std::size_t>(grid.cell_count()));
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        const auto cu = static_cast<std::uint64_t>(c);
        double ev[kMaxDim];
        for (int i = 0; i < d; ++i) {
            ev[i] = std::exp(llo + (lhi - llo) * rng.uniform(0, cu, static_cast<std::uint64_t>(i)));
        }
        // Orthonormal frame Q; a = Q diag(ev) Q^T.
        double q[kMaxDim][kMaxDim] = {};
        for (int i = 0; i < d; ++i) {
            q[i][i] = 1.0;
        }
        if (!diagonal && d == 2) {
            const double th = 2.0 * std::numbers::pi * rng.uniform(1, cu, 0);
            q[0][0] = std::cos(th);
            q[0][1] = -std::sin(th);
            q[1][0] = std::sin(th);
            q[1][1] = std::cos(th);
        } else if (!diagonal && d == 3) {
            // Random unit quaternion.
            double w = rng.normal(1, cu), x = rng.normal(2, cu), y = rng.normal(3, cu), z = rng.normal(4, cu);
            const double nrm = std::sqrt(w * w + x * x + y * y + z * z);
            w /= nrm, x /= nrm, y /= nrm, z /= nrm;
            const double r[3][3] = {{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
                                    {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
                                    {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    q[i][j] = r[i][j];
                }
            }
        }
        SymMat m(d);
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) {
                    acc += q[i][k] * ev[k] * q[j][k];
                }
                m.set(i, j, acc);
            }
        }
        cells.push_back(m);
    }
    CoefficientField field = CoefficientField::from_cells(
        grid, cells,
        std::string(diagonal ? "random_diag" : "random_spd") + "(d=" + std::to_string(d) + ",N=" +
            std::to_string(grid.level) + ",lo=" + fmt_double(lo) + ",hi=" + fmt_double(hi) +
            ",seed=" + std::to_string(seed) + ")");
    field.check_positive_definite();
    return field;
}

double lp_mass(const ScalarGridFunction& cells, double p) {
    cells.validate();
    if (cells.sampling != Sampling::cell) {
        throw ValidationError("lp_mass expects a cell-sampled function");
    }
    double vol = 1.0;
    for (int a = 0; a < cells.grid.dim; ++a) {
        vol *= cells.grid.cell_size();
    }
    double acc = 0.0;
    for (double v : cells.values) {
        acc += std::pow(std::abs(v), p);
    }
    return acc * vol;
}

}  // namespace cge
