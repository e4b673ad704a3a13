#include "cge/besov_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cge {

namespace {

void check_cells(const ScalarGridFunction& f) {
    f.validate();
    if (f.sampling != Sampling::cell || f.domain != TriadicCube::root()) {
        throw ValidationError("expected a cell-sampled function on the unit cube");
    }
}

/// Averages over the partition at every level: out[j] is level -j.
template <class T>
std::vector<std::vector<T>> level_averages(const GridSpec& grid, std::vector<T> cells, const T& zero) {
    std::vector<std::vector<T>> out(static_cast<std::size_t>(grid.level + 1));
    out[static_cast<std::size_t>(grid.level)] = std::move(cells);
    const double inv = 1.0 / static_cast<double>(ipow3(grid.dim));
    for (int j = grid.level - 1; j >= 0; --j) {
        const std::int64_t per_side = ipow3(j);
        const std::int64_t fine_side = per_side * 3;
        std::int64_t count = 1;
        for (int a = 0; a < grid.dim; ++a) count *= per_side;
        const auto& fine = out[static_cast<std::size_t>(j + 1)];
        std::vector<T> coarse(static_cast<std::size_t>(count), zero);
        for (std::int64_t f = 0; f < static_cast<std::int64_t>(fine.size()); ++f) {
            const Index idx = grid.unravel(f, fine_side);
            Index parent{};
            for (int a = 0; a < grid.dim; ++a) parent[a] = idx[a] / 3;
            coarse[static_cast<std::size_t>(grid.linear(parent, per_side))] += fine[static_cast<std::size_t>(f)];
        }
        for (T& v : coarse) v *= inv;
        out[static_cast<std::size_t>(j)] = std::move(coarse);
    }
    return out;
}

void check_unit_interval(double s, bool allow_one, const char* name) {
    if (!(s > 0.0 && (s < 1.0 || (allow_one && s == 1.0)))) {
        std::ostringstream os;
        os << name << " = " << s << " outside " << (allow_one ? "(0,1]" : "(0,1)");
        throw RangeError(os.str());
    }
}

void check_exponent_p(double p, const char* name) {
    if (!(p >= 1.0)) {
        std::ostringstream os;
        os << name << " = " << p << " must be >= 1";
        throw RangeError(os.str());
    }
}

}  // namespace

double conjugate_exponent(double p) {
    check_exponent_p(p, "p");
    if (p == 1.0) return kInfinity;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

double besov_seminorm(const ScalarGridFunction& f, double s, double p) {
    check_cells(f);
    check_unit_interval(s, true, "s");
    check_exponent_p(p, "p");
    if (std::isinf(p)) throw RangeError("besov_seminorm requires p < inf");
    const GridSpec& grid = f.grid;
    const std::int64_t n_cells = grid.cells_per_side();
    double best = 0.0;
    for (int n = 0; n >= -grid.level + 1; --n) {
        const std::int64_t side = ipow3(n + grid.level);
        const std::int64_t step = side / 3;
        const std::int64_t positions = (n_cells - side) / (n == 0 ? 1 : step) + 1;
        const std::int64_t stride = n == 0 ? 1 : step;
        std::int64_t count = 1, cube_cells = 1;
        for (int a = 0; a < grid.dim; ++a) {
            count *= positions;
            cube_cells *= side;
        }
        double acc = 0.0;
        Index pos{};
        for (std::int64_t c = 0; c < count; ++c) {
            Index first{};
            for (int a = 0; a < grid.dim; ++a) first[a] = pos[a] * stride;
            auto visit = [&](auto&& fn) {
                Index local{};
                for (std::int64_t i = 0; i < cube_cells; ++i) {
                    Index cell{};
                    for (int a = 0; a < grid.dim; ++a) cell[a] = first[a] + local[a];
                    fn(f.values[static_cast<std::size_t>(grid.linear(cell, n_cells))]);
                    for (int a = grid.dim - 1; a >= 0; --a) {
                        if (++local[a] < side) break;
                        local[a] = 0;
                    }
                }
            };
            double mean = 0.0;
            visit([&](double v) { mean += v; });
            mean /= static_cast<double>(cube_cells);
            double dev = 0.0;
            visit([&](double v) { dev += std::pow(std::abs(v - mean), p); });
            acc += dev / static_cast<double>(cube_cells);
            for (int a = grid.dim - 1; a >= 0; --a) {
                if (++pos[a] < positions) break;
                pos[a] = 0;
            }
        }
        const double term = std::pow(3.0, -s * n) * std::pow(acc / static_cast<double>(count), 1.0 / p);
        best = std::max(best, term);
    }
    return best;
}

std::vector<double> level_maxima(const ScalarGridFunction& f) {
    check_cells(f);
    const auto avgs = level_averages<double>(f.grid, f.values, 0.0);
    std::vector<double> out;
    for (const auto& level : avgs) {
        double m = 0.0;
        for (double v : level) m = std::max(m, std::abs(v));
        out.push_back(m);
    }
    return out;
}

DualSumResult dual_sum_norm(const ScalarGridFunction& f, double s, double p_conj) {
    check_cells(f);
    check_unit_interval(s, true, "s");
    check_exponent_p(p_conj, "p'");
    const GridSpec& grid = f.grid;
    const auto avgs = level_averages<double>(grid, f.values, 0.0);
    DualSumResult r;
    for (int j = 0; j <= grid.level; ++j) {
        const auto& level = avgs[static_cast<std::size_t>(j)];
        double inner = 0.0;
        if (std::isinf(p_conj)) {
            for (double v : level) inner = std::max(inner, std::abs(v));
        } else {
            for (double v : level) inner += std::pow(std::abs(v), p_conj);
            inner = std::pow(inner / static_cast<double>(level.size()), 1.0 / p_conj);
        }
        DualSumTerm term{-j, inner, std::pow(3.0, -s * j) * inner};
        r.total += term.weighted;
        r.terms.push_back(term);
    }
    r.tail = r.terms.back().inner * std::pow(3.0, -s * (grid.level + 1)) / (1.0 - std::pow(3.0, -s));
    r.total += r.tail;
    return r;
}

DiscountedAverages scale_discounted_averages(const CoefficientField& field, double s, Component component) {
    check_unit_interval(s, false, "s");
    const GridSpec& grid = field.grid();
    std::vector<SymMat> cells;
    cells.reserve(static_cast<std::size_t>(grid.cell_count()));
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        const SymMat m = field.cell(c);
        if (component == Component::a) {
            cells.push_back(m);
        } else {
            try {
                cells.push_back(m.inverse());
            } catch (const DegenerateFieldError&) {
                throw DegenerateFieldError("cannot invert coefficient in cell " + std::to_string(c));
            }
        }
    }
    const auto avgs = level_averages<SymMat>(grid, std::move(cells), SymMat(grid.dim));
    DiscountedAverages r;
    r.s = s;
    r.component = component;
    const double c_s = 1.0 - std::pow(3.0, -s);
    double sum = 0.0;
    for (int j = 0; j <= grid.level; ++j) {
        double m = 0.0;
        for (const SymMat& a : avgs[static_cast<std::size_t>(j)]) m = std::max(m, a.norm());
        DiscountedTerm term{-j, std::sqrt(m), c_s * std::pow(3.0, -s * j)};
        sum += term.weight * term.max_root;
        r.terms.push_back(term);
    }
    r.tail = r.terms.back().max_root * std::pow(3.0, -s * (grid.level + 1));
    sum += r.tail;
    r.total = sum * sum;
    return r;
}

double fractional_seminorm(const ScalarGridFunction& f, double s, double p) {
    check_cells(f);
    check_unit_interval(s, true, "s");
    check_exponent_p(p, "p");
    if (std::isinf(p)) throw RangeError("fractional_seminorm requires p < inf");
    const GridSpec& grid = f.grid;
    const std::int64_t n = grid.cell_count();
    if (n > kFractionalCellLimit) {
        throw ResolutionError("fractional_seminorm limited to " + std::to_string(kFractionalCellLimit) + " cells, got " +
                              std::to_string(n));
    }
    const std::int64_t per_side = grid.cells_per_side();
    const double h = grid.cell_size();
    const double expo = (grid.dim + s * p) / 2.0;
    std::vector<std::array<double, kMaxDim>> mid(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const Index idx = grid.unravel(i, per_side);
        for (int a = 0; a < grid.dim; ++a) mid[static_cast<std::size_t>(i)][a] = (static_cast<double>(idx[a]) + 0.5) * h;
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double fi = f.values[static_cast<std::size_t>(i)];
        const auto& xi = mid[static_cast<std::size_t>(i)];
        for (std::int64_t j = i + 1; j < n; ++j) {
            const double diff = std::abs(fi - f.values[static_cast<std::size_t>(j)]);
            if (diff == 0.0) continue;
            const auto& xj = mid[static_cast<std::size_t>(j)];
            double r2 = 0.0;
            for (int a = 0; a < grid.dim; ++a) r2 += (xi[a] - xj[a]) * (xi[a] - xj[a]);
            acc += std::pow(diff, p) / std::pow(r2, expo);
        }
    }
    const double vol = std::pow(h, grid.dim);
    return std::pow(2.0 * acc * vol * vol, 1.0 / p);
}

CriterionExponents criterion_exponents(int dim, const CriterionInput& in) {
    if (dim < 1) throw ValidationError("dimension must be positive");
    if (!(in.p > 1.0) || !(in.q > 1.0)) throw ValidationError("p and q must exceed 1");
    if (!(in.alpha >= 0.0 && in.alpha < 1.0) || !(in.beta >= 0.0 && in.beta < 1.0)) {
        throw ValidationError("alpha and beta must lie in [0,1)");
    }
    const double ip = 1.0 / in.p;
    const double iq = 1.0 / in.q;
    if (!(in.alpha < 1.0 - ip)) throw ValidationError("alpha must be below 1 - 1/p");
    if (!(in.beta < 1.0 - iq)) throw ValidationError("beta must be below 1 - 1/q");
    CriterionExponents e;
    e.dim = dim;
    e.sigma_tilde = 1.0 - 0.5 * dim * (ip + iq) - 0.5 * (in.alpha + in.beta);
    e.satisfied = e.sigma_tilde > 0.0;
    if (std::isinf(in.p) || std::isinf(in.q)) {
        e.notes.push_back("p or q infinite: outside the (1,inf) range of the fractional Sobolev bound; "
                          "only the discrete sums are reported");
    }
    if (in.alpha == 0.0 || in.beta == 0.0) {
        e.notes.push_back("alpha or beta = 0: the fractional Sobolev constant 1/(alpha p' (1 - alpha p')) is infinite");
    }
    if (!e.satisfied) {
        e.notes.push_back("sigma_tilde <= 0: criterion fails");
        return e;
    }
    const double gap = 1.0 - e.sigma_tilde;
    e.epsilon = gap > 0.0 ? 0.5 * std::min(e.sigma_tilde, gap) : 0.2;
    const double excess = e.sigma_tilde - 0.5 * e.epsilon;
    e.s = 0.5 * in.alpha + 0.5 * dim * ip + 0.5 * excess;
    e.t = 0.5 * in.beta + 0.5 * dim * iq + 0.5 * excess;
    e.sigma1 = e.s - 0.5 * in.alpha - 0.5 * dim * ip;
    e.sigma2 = e.t - 0.5 * in.beta - 0.5 * dim * iq;
    if (!(e.s < 1.0) || !(e.t < 1.0)) {
        e.notes.push_back("equal split puts s or t at or above 1");
        e.satisfied = false;
    }
    return e;
}

CriterionReport sobolev_criterion_report(const CoefficientField& field, const CriterionInput& input,
                                         const SweepResult* sweep) {
    CriterionReport r;
    r.input = input;
    r.exponents = criterion_exponents(field.grid().dim, input);
    if (!r.exponents.satisfied) return r;
    const auto& e = r.exponents;
    r.a_terms = scale_discounted_averages(field, e.s, Component::a);
    r.a_inv_terms = scale_discounted_averages(field, e.t, Component::a_inv);
    r.theta_bound = r.a_terms->total * r.a_inv_terms->total;
    auto c = [](double x) { return 1.0 - std::pow(3.0, -x); };
    r.prefactor = std::pow(c(e.s) * c(e.t) / (c(e.sigma1) * c(e.sigma2)), 2);
    if (sweep != nullptr) r.theta_solver = ellipticity_constants(*sweep, e.s, e.t).theta;
    return r;
}

}  // namespace cge
