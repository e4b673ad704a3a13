#include "cge/regularity_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cge/field_generators.hpp"

namespace cge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Gauss-Legendre rules on [0,1].
const std::vector<std::pair<double, double>>& gauss_rule(int n) {
    static const std::vector<std::pair<double, double>> rules[5] = {
        {{0.5, 1.0}},
        {{0.5 - 0.5 / std::sqrt(3.0), 0.5}, {0.5 + 0.5 / std::sqrt(3.0), 0.5}},
        {{0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0}},
        {{0.5 - 0.5 * 0.8611363115940526, 0.5 * 0.3478548451374538},
         {0.5 - 0.5 * 0.3399810435848563, 0.5 * 0.6521451548625461},
         {0.5 + 0.5 * 0.3399810435848563, 0.5 * 0.6521451548625461},
         {0.5 + 0.5 * 0.8611363115940526, 0.5 * 0.3478548451374538}},
        {{0.5 - 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891},
         {0.5 - 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
         {0.5, 0.5 * 0.5688888888888889},
         {0.5 + 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
         {0.5 + 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891}},
    };
    if (n < 1 || n > 5) throw ConfigError("quadrature_points must be in 1..5");
    return rules[n - 1];
}

double box_lo(double rho) { return 0.5 - 0.5 * rho; }
double box_hi(double rho) { return 0.5 + 0.5 * rho; }

void check_root_nodal(const GridSpec& grid, const ScalarGridFunction& u) {
    u.validate();
    if (u.sampling != Sampling::nodal || u.domain != TriadicCube::root() || !(u.grid == grid)) {
        throw ValidationError("expected a nodal function on the whole grid");
    }
}

/// L^q norm over the box of psi(u), psi monotone; q may be infinite.
template <class Psi>
double box_norm(const NodalInterpolant& I, double rho, double q, int points, Psi&& psi) {
    const double lo = box_lo(rho), hi = box_hi(rho);
    if (std::isinf(q)) {
        const auto [sup, inf] = I.extrema(lo, hi);
        return std::max(std::abs(psi(sup)), std::abs(psi(inf)));
    }
    const double avg = I.average(lo, hi, points, [&](double v, const auto&, std::int64_t) {
        return std::pow(std::abs(psi(v)), q);
    });
    return std::pow(avg, 1.0 / q);
}

void check_st(double s, double t) {
    if (!(s > 0.0 && s < 1.0) || !(t > 0.0 && t < 1.0)) throw RangeError("s and t must lie in (0,1)");
    if (!(s + t < 1.0)) throw RangeError("s + t must be below 1");
}

EllipticityReport compute_ellipticity(const CoefficientField& field, double s, double t,
                                      const ExperimentConfig& config) {
    check_st(s, t);
    const SweepResult sw = sweep(field, config.sweep);
    return ellipticity_constants(sw, s, t);
}

enum class ExperimentKind { harnack, local_boundedness };

ExperimentRecord run_experiment(ExperimentKind kind, const CoefficientField& field, const BoundaryData& data,
                                const EllipticityReport& ell, const ExperimentConfig& config) {
    check_st(ell.s, ell.t);
    const GridSpec& grid = field.grid();
    const ScalarGridFunction bc = sample_boundary(grid, data);

    double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
    {
        const std::int64_t np = grid.nodes_per_side();
        for (std::int64_t i = 0; i < bc.point_count(); ++i) {
            const Index idx = grid.unravel(i, np);
            bool boundary = false;
            for (int a = 0; a < grid.dim; ++a) boundary = boundary || idx[a] == 0 || idx[a] == np - 1;
            if (!boundary) continue;
            bmin = std::min(bmin, bc.values[static_cast<std::size_t>(i)]);
            bmax = std::max(bmax, bc.values[static_cast<std::size_t>(i)]);
        }
    }
    if (kind == ExperimentKind::harnack && !(bmin > 0.0)) {
        throw ValidationError("Harnack experiment needs strictly positive boundary data (min " + std::to_string(bmin) +
                              ")");
    }

    SolveConfig solve = config.solve;
    if (kind == ExperimentKind::harnack) solve.discretization = Discretization::fd5;
    const Solution sol = solve_dirichlet(field, TriadicCube::root(), bc, solve);
    const NodalInterpolant I(sol.u);
    const int qp = config.quadrature_points;

    ExperimentRecord r;
    r.kind = kind == ExperimentKind::harnack ? "harnack" : "local_boundedness";
    r.field_descriptor = field.descriptor();
    r.field_hash = field.content_hash_hex();
    r.boundary = data.descriptor();
    r.dim = grid.dim;
    r.level = grid.level;
    r.s = ell.s;
    r.t = ell.t;
    r.sigma = 1.0 - ell.s - ell.t;
    r.theta = ell.theta;
    r.Lambda_s = ell.Lambda_s;
    r.lambda_t = ell.lambda_t;
    r.stats = sol.stats;
    r.discretization = to_string(solve.discretization);

    const auto [umin, umax] = std::minmax_element(sol.u.values.begin(), sol.u.values.end());
    const double tol = 1e-9 * std::max(bmax - bmin, std::max(std::abs(bmax), 1e-300));
    r.max_principle_ok = *umin >= bmin - tol && *umax <= bmax + tol;

    for (double rho : {0.125, 0.25, 0.5}) {
        const auto [sup, inf] = I.extrema(box_lo(rho), box_hi(rho));
        r.subcubes.push_back({rho, sup, inf});
    }
    r.u_plus_l2 = box_norm(I, 1.0, 2.0, qp, [](double v) { return std::max(v, 0.0); });
    const SubcubeStats& eighth = r.subcubes[0];
    const SubcubeStats& half = r.subcubes[2];
    if (eighth.inf > 0.0) {
        r.harnack_log_ratio = std::log(eighth.sup / eighth.inf);
    } else if (kind == ExperimentKind::harnack) {
        throw Error("maximum principle violated: inf of u on (1/8) box_0 is " + std::to_string(eighth.inf));
    } else {
        r.harnack_log_ratio = kNaN;
    }
    r.lb_ratio = r.u_plus_l2 > 0.0 ? std::max(half.sup, 0.0) / r.u_plus_l2 : 0.0;

    const Calibration& cal = config.calibration;
    if (kind == ExperimentKind::harnack) {
        r.bound = cal.harnack / ell.t * std::sqrt(ell.theta);
        r.pass = r.harnack_log_ratio <= r.bound;
    } else {
        r.bound = cal.local_bound * std::pow(ell.theta, grid.dim / (4.0 * r.sigma));
        r.pass = r.lb_ratio <= r.bound;
    }

    // Diagnostics that only need quantities already at hand.
    r.diagnostics["sobolev_poincare"] = sobolev_poincare_diagnostic(field, sol.u, ell.t, ell.lambda_t, qp);
    if (half.inf > 0.0) {
        r.diagnostics["log_caccioppoli"] = log_caccioppoli_diagnostic(field, sol.u, ell.Lambda_s, qp);
        if (r.subcubes.size() == 3 && I.extrema(0.0, 1.0).second > 0.0) {
            r.diagnostics["reverse_holder_power2"] =
                reverse_holder_diagnostic(field, sol.u, ReverseHolderKind::power(2.0), 0.5, 1.0, ell.s, ell.t,
                                          ell.theta, qp);
        }
        const double p_star = cal.p_star_c * ell.t / std::sqrt(ell.theta);
        const double mean_log = I.average(box_lo(0.5), box_hi(0.5), qp,
                                          [](double v, const auto&, std::int64_t) { return std::log(v); });
        const double q = sobolev_exponent(grid.dim, ell.t);
        const double norm = box_norm(I, 0.5, q, qp, [&](double v) { return p_star * (std::log(v) - mean_log); });
        r.diagnostics["p_star"] = p_star;
        r.diagnostics["log_w_norm"] = norm;
        r.diagnostics["log_w_within_one"] = norm <= 1.0 ? 1.0 : 0.0;
    }
    const double trunc_level = 0.5 * (half.sup + half.inf);
    r.diagnostics["reverse_holder_trunc_mid"] = reverse_holder_diagnostic(
        field, sol.u, ReverseHolderKind::truncation(trunc_level), 0.5, 1.0, ell.s, ell.t, ell.theta, qp);
    return r;
}

}  // namespace

BoundaryData BoundaryData::constant(double c) {
    BoundaryData b;
    b.kind = Kind::constant;
    b.offset = c;
    return b;
}

BoundaryData BoundaryData::affine(double c0, std::array<double, kMaxDim> slope) {
    BoundaryData b;
    b.kind = Kind::affine;
    b.offset = c0;
    b.slope = slope;
    return b;
}

BoundaryData BoundaryData::exp_cos(double lambda, double factor) {
    if (!(lambda > 0.0)) throw ValidationError("exp_cos needs lambda > 0");
    BoundaryData b;
    b.kind = Kind::exp_cos;
    b.lambda = lambda;
    b.offset = factor;
    return b;
}

double BoundaryData::operator()(std::span<const double> x) const {
    switch (kind) {
        case Kind::constant:
            return offset;
        case Kind::affine: {
            double v = offset;
            for (std::size_t i = 0; i < x.size(); ++i) v += slope[i] * x[i];
            return v;
        }
        case Kind::exp_cos:
            if (x.size() < 2) throw ValidationError("exp_cos boundary data needs d >= 2");
            return offset * std::exp(std::sqrt(lambda) * x[0]) * std::cos(x[1]);
    }
    return 0.0;
}

BoundaryData BoundaryData::scaled(double factor) const {
    BoundaryData b = *this;
    b.offset *= factor;
    if (kind == Kind::affine) {
        for (double& v : b.slope) v *= factor;
    }
    return b;
}

std::string BoundaryData::descriptor() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::constant:
            os << "constant(c=" << offset << ")";
            break;
        case Kind::affine:
            os << "affine(c=" << offset << ",slope=" << slope[0] << ":" << slope[1] << ":" << slope[2] << ")";
            break;
        case Kind::exp_cos:
            os << "exp_cos(lambda=" << lambda << ",factor=" << offset << ")";
            break;
    }
    return os.str();
}

ScalarGridFunction sample_boundary(const GridSpec& grid, const BoundaryData& data) {
    return ScalarGridFunction::from_nodal_function(grid, TriadicCube::root(),
                                                   [&](std::span<const double> x) { return data(x); });
}

NodalInterpolant::NodalInterpolant(const ScalarGridFunction& u)
    : u_(u), n_(u.grid.cells_per_side()), h_(u.grid.cell_size()) {
    check_root_nodal(u.grid, u);
}

void NodalInterpolant::locate(std::span<const double> x, Index& cell, std::array<double, kMaxDim>& xi) const {
    for (int a = 0; a < u_.grid.dim; ++a) {
        const double pos = x[static_cast<std::size_t>(a)] / h_;
        std::int64_t c = static_cast<std::int64_t>(std::floor(pos));
        c = std::clamp<std::int64_t>(c, 0, n_ - 1);
        cell[a] = c;
        xi[a] = std::clamp(pos - static_cast<double>(c), 0.0, 1.0);
    }
}

double NodalInterpolant::value_in(const Index& cell, const std::array<double, kMaxDim>& xi) const {
    const int dim = u_.grid.dim;
    const std::int64_t np = n_ + 1;
    double v = 0.0;
    for (int a = 0; a < (1 << dim); ++a) {
        double w = 1.0;
        std::int64_t lin = 0;
        for (int k = 0; k < dim; ++k) {
            const int bit = (a >> k) & 1;
            w *= bit ? xi[k] : 1.0 - xi[k];
            lin = lin * np + cell[k] + bit;
        }
        v += w * u_.values[static_cast<std::size_t>(lin)];
    }
    return v;
}

std::array<double, kMaxDim> NodalInterpolant::gradient_in(const Index& cell,
                                                          const std::array<double, kMaxDim>& xi) const {
    const int dim = u_.grid.dim;
    const std::int64_t np = n_ + 1;
    std::array<double, kMaxDim> g{};
    for (int a = 0; a < (1 << dim); ++a) {
        std::int64_t lin = 0;
        for (int k = 0; k < dim; ++k) lin = lin * np + cell[k] + ((a >> k) & 1);
        const double ua = u_.values[static_cast<std::size_t>(lin)];
        for (int i = 0; i < dim; ++i) {
            double w = ((a >> i) & 1) ? 1.0 : -1.0;
            for (int k = 0; k < dim; ++k) {
                if (k != i) w *= ((a >> k) & 1) ? xi[k] : 1.0 - xi[k];
            }
            g[i] += w * ua;
        }
    }
    for (int i = 0; i < dim; ++i) g[i] /= h_;
    return g;
}

double NodalInterpolant::value(std::span<const double> x) const {
    Index cell{};
    std::array<double, kMaxDim> xi{};
    locate(x, cell, xi);
    return value_in(cell, xi);
}

std::array<double, kMaxDim> NodalInterpolant::gradient(std::span<const double> x) const {
    Index cell{};
    std::array<double, kMaxDim> xi{};
    locate(x, cell, xi);
    return gradient_in(cell, xi);
}

std::pair<double, double> NodalInterpolant::extrema(double lo, double hi) const {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw RangeError("box outside the unit cube");
    std::vector<double> axis{lo};
    for (std::int64_t i = 0; i <= n_; ++i) {
        const double x = static_cast<double>(i) * h_;
        if (x > lo && x < hi) axis.push_back(x);
    }
    axis.push_back(hi);
    const int dim = u_.grid.dim;
    const auto m = static_cast<std::int64_t>(axis.size());
    std::int64_t count = 1;
    for (int a = 0; a < dim; ++a) count *= m;
    double sup = -std::numeric_limits<double>::infinity(), inf = -sup;
    Index idx{};
    std::array<double, kMaxDim> x{};
    for (std::int64_t c = 0; c < count; ++c) {
        for (int a = 0; a < dim; ++a) x[a] = axis[static_cast<std::size_t>(idx[a])];
        const double v = value(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
        sup = std::max(sup, v);
        inf = std::min(inf, v);
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < m) break;
            idx[a] = 0;
        }
    }
    return {sup, inf};
}

void NodalInterpolant::quadrature(double lo, double hi, int points, std::vector<Point>& out) const {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) throw RangeError("box outside the unit cube");
    const auto& rule = gauss_rule(points);
    struct Seg {
        std::int64_t cell;
        double a, b;  // local coordinates in the cell
    };
    std::vector<Seg> segs;
    const auto first = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(lo / h_)), 0, n_ - 1);
    const auto last = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(hi / h_)) - 1, 0, n_ - 1);
    for (std::int64_t i = first; i <= last; ++i) {
        const double a = std::max(lo / h_ - static_cast<double>(i), 0.0);
        const double b = std::min(hi / h_ - static_cast<double>(i), 1.0);
        if (b - a > 1e-12) segs.push_back({i, a, b});
    }
    const int dim = u_.grid.dim;
    const auto ns = static_cast<std::int64_t>(segs.size());
    const auto nr = static_cast<std::int64_t>(rule.size());
    std::int64_t cells = 1, pts = 1;
    for (int a = 0; a < dim; ++a) {
        cells *= ns;
        pts *= nr;
    }
    out.clear();
    out.reserve(static_cast<std::size_t>(cells * pts));
    Index sidx{};
    for (std::int64_t c = 0; c < cells; ++c) {
        Index qidx{};
        for (std::int64_t q = 0; q < pts; ++q) {
            Point p;
            p.weight = 1.0;
            std::int64_t lin = 0;
            for (int a = 0; a < dim; ++a) {
                const Seg& s = segs[static_cast<std::size_t>(sidx[a])];
                const auto& [node, w] = rule[static_cast<std::size_t>(qidx[a])];
                p.cell[a] = s.cell;
                p.xi[a] = s.a + (s.b - s.a) * node;
                p.weight *= (s.b - s.a) * w;
                lin = lin * n_ + s.cell;
            }
            p.linear = lin;
            out.push_back(p);
            for (int a = dim - 1; a >= 0; --a) {
                if (++qidx[a] < nr) break;
                qidx[a] = 0;
            }
        }
        for (int a = dim - 1; a >= 0; --a) {
            if (++sidx[a] < ns) break;
            sidx[a] = 0;
        }
    }
}

double sobolev_exponent(int dim, double s) {
    const double den = dim - 2.0 * (1.0 - s);
    return den > 0.0 ? 2.0 * dim / den : std::numeric_limits<double>::infinity();
}

ExperimentRecord harnack_experiment(const CoefficientField& field, const BoundaryData& data, double s, double t,
                                    const ExperimentConfig& config) {
    return harnack_experiment(field, data, compute_ellipticity(field, s, t, config), config);
}

ExperimentRecord harnack_experiment(const CoefficientField& field, const BoundaryData& data,
                                    const EllipticityReport& ellipticity, const ExperimentConfig& config) {
    return run_experiment(ExperimentKind::harnack, field, data, ellipticity, config);
}

ExperimentRecord local_boundedness_experiment(const CoefficientField& field, const BoundaryData& data, double s,
                                              double t, const ExperimentConfig& config) {
    return local_boundedness_experiment(field, data, compute_ellipticity(field, s, t, config), config);
}

ExperimentRecord local_boundedness_experiment(const CoefficientField& field, const BoundaryData& data,
                                              const EllipticityReport& ellipticity, const ExperimentConfig& config) {
    return run_experiment(ExperimentKind::local_boundedness, field, data, ellipticity, config);
}

double reverse_holder_diagnostic(const CoefficientField& field, const ScalarGridFunction& u, ReverseHolderKind kind,
                                 double rho1, double rho2, double s, double t, double theta, int quadrature_points) {
    check_root_nodal(field.grid(), u);
    check_st(s, t);
    if (!(rho1 >= 0.5 && rho1 < rho2 && rho2 <= 1.0)) throw RangeError("need 1/2 <= rho1 < rho2 <= 1");
    if (!(theta >= 1.0 - 1e-9)) throw RangeError("theta must be at least 1");
    const int dim = field.grid().dim;
    const double sigma = 1.0 - s - t;
    const double q = sobolev_exponent(dim, t);
    const double gap = rho2 - rho1;
    const NodalInterpolant I(u);
    double lhs = 0.0, rhs_norm = 0.0, factor = 0.0;
    const double expo = (s + sigma) / sigma;
    if (kind.type == ReverseHolderKind::Type::power) {
        const double p = kind.value;
        if (p == 0.0 || p == 1.0) throw RangeError("power exponent must not be 0 or 1");
        if (!(I.extrema(box_lo(rho2), box_hi(rho2)).second > 0.0)) {
            throw ValidationError("power diagnostic needs u > 0");
        }
        auto psi = [p](double v) { return std::pow(v, 0.5 * p); };
        lhs = box_norm(I, rho1, q, quadrature_points, psi);
        rhs_norm = box_norm(I, rho2, 2.0, quadrature_points, psi);
        factor = 1.0 + std::pow(std::abs(p) * std::sqrt(theta) / (std::abs(p - 1.0) * sigma * t * gap), expo);
    } else {
        const double k = kind.value;
        auto psi = [k](double v) { return std::max(v - k, 0.0); };
        lhs = box_norm(I, rho1, q, quadrature_points, psi);
        rhs_norm = box_norm(I, rho2, 2.0, quadrature_points, psi);
        factor = std::pow(std::sqrt(theta) / (sigma * t * gap), expo);
    }
    if (rhs_norm == 0.0) return 0.0;
    return lhs / (std::pow(gap, -0.5 * dim) * factor * rhs_norm);
}

double log_caccioppoli_diagnostic(const CoefficientField& field, const ScalarGridFunction& u, double Lambda_s,
                                  int quadrature_points) {
    check_root_nodal(field.grid(), u);
    if (!(Lambda_s > 0.0)) throw RangeError("Lambda_s must be positive");
    const NodalInterpolant I(u);
    if (!(I.extrema(box_lo(0.5), box_hi(0.5)).second > 0.0)) {
        throw ValidationError("log-Caccioppoli diagnostic needs u > 0 on (1/2) box_0");
    }
    const int dim = field.grid().dim;
    const double e = I.average(box_lo(0.5), box_hi(0.5), quadrature_points,
                               [&](double v, const std::array<double, kMaxDim>& g, std::int64_t cell) {
                                   const auto span = std::span<const double>(g.data(), static_cast<std::size_t>(dim));
                                   return field.cell(cell).quadratic(span) / (v * v);
                               });
    return e / Lambda_s;
}

double sobolev_poincare_diagnostic(const CoefficientField& field, const ScalarGridFunction& u, double s,
                                   double lambda_s, int quadrature_points) {
    check_root_nodal(field.grid(), u);
    if (!(s > 0.0 && s <= 1.0)) throw RangeError("s must lie in (0,1]");
    if (!(lambda_s > 0.0)) throw RangeError("lambda_s must be positive");
    const auto [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
    if (*hi - *lo <= 1e-13 * std::max(std::abs(*hi), std::abs(*lo))) return 0.0;
    const NodalInterpolant I(u);
    const double mean = I.average(0.0, 1.0, quadrature_points, [](double v, const auto&, std::int64_t) { return v; });
    const double q = sobolev_exponent(field.grid().dim, s);
    const double lhs = box_norm(I, 1.0, q, quadrature_points, [mean](double v) { return v - mean; });
    const double en = energy(field, TriadicCube::root(), u);
    if (!(en > 0.0)) return 0.0;
    return lhs / (std::sqrt(en) / (s * std::sqrt(lambda_s)));
}

double sharpness_expected(double lambda) {
    return std::sqrt(lambda) / 8.0 - std::log(std::cos(1.0 / 16.0));
}

SharpnessReport sharpness_sweep(const std::vector<double>& lambdas, double s, double t, int level,
                                const ExperimentConfig& config) {
    if (lambdas.size() < 4) throw ValidationError("sharpness sweep needs at least 4 lambda values");
    for (double l : lambdas) {
        if (!(l >= 1.0)) throw ValidationError("sharpness lambdas must be >= 1");
    }
    check_st(s, t);
    const GridSpec grid = GridSpec::make(2, level);
    SharpnessReport rep;
    rep.level = level;
    rep.s = s;
    rep.t = t;
    for (double lambda : lambdas) {
        try {
            const double diag[2] = {1.0, lambda};
            const CoefficientField field = gen_constant(grid, SymMat::diagonal(diag));
            ExperimentRecord rec = harnack_experiment(field, BoundaryData::exp_cos(lambda), s, t, config);
            SharpnessPoint pt;
            pt.lambda = lambda;
            pt.x = std::sqrt(lambda);
            pt.log_ratio = rec.harnack_log_ratio;
            pt.expected = sharpness_expected(lambda);
            pt.relative_error = std::abs(pt.log_ratio - pt.expected) / pt.expected;
            pt.theta = rec.theta;
            rep.points.push_back(pt);
            rep.records.push_back(std::move(rec));
        } catch (const Error& e) {
            std::ostringstream os;
            os << "lambda=" << lambda << ": " << e.what();
            rep.failures.push_back(os.str());
        }
    }
    const auto n = static_cast<double>(rep.points.size());
    if (rep.points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& p : rep.points) {
            sx += p.x;
            sy += p.log_ratio;
            sxx += p.x * p.x;
            sxy += p.x * p.log_ratio;
        }
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.intercept = (sy - rep.slope * sx) / n;
    }
    return rep;
}

DiagnosticBaselines diagnostic_baselines(int dim, int level, double s, double t, const ExperimentConfig& config) {
    check_st(s, t);
    const GridSpec grid = GridSpec::make(dim, level);
    const CoefficientField field = gen_constant(grid, SymMat::identity(dim));
    std::array<double, kMaxDim> slope{};
    slope[0] = 1.0;
    const ScalarGridFunction u = sample_boundary(grid, BoundaryData::affine(2.0, slope));
    DiagnosticBaselines b;
    b.reverse_holder =
        reverse_holder_diagnostic(field, u, ReverseHolderKind::power(2.0), 0.5, 1.0, s, t, 1.0, config.quadrature_points);
    b.sobolev_poincare = sobolev_poincare_diagnostic(field, u, s, 1.0, config.quadrature_points);
    b.log_caccioppoli = 1.0;
    return b;
}

Calibration fit_calibration(int dim, int level, double s, double t, const ExperimentConfig& config) {
    const GridSpec grid = GridSpec::make(dim, level);
    const CoefficientField field = gen_constant(grid, SymMat::identity(dim));
    const EllipticityReport ell = compute_ellipticity(field, s, t, config);
    std::vector<BoundaryData> suite;
    std::array<double, kMaxDim> e1{}, diag{};
    e1[0] = 1.0;
    for (int a = 0; a < dim; ++a) diag[a] = 1.0;
    suite.push_back(BoundaryData::constant(1.0));
    suite.push_back(BoundaryData::affine(2.0, e1));
    suite.push_back(BoundaryData::affine(3.0, diag));
    if (dim >= 2) suite.push_back(BoundaryData::exp_cos(1.0));
    Calibration cal = config.calibration;
    cal.harnack = 0.0;
    cal.local_bound = 0.0;
    for (const BoundaryData& data : suite) {
        const auto h = harnack_experiment(field, data, ell, config);
        cal.harnack = std::max(cal.harnack, h.harnack_log_ratio * t / std::sqrt(ell.theta));
        const auto lb = local_boundedness_experiment(field, data, ell, config);
        cal.local_bound = std::max(cal.local_bound, lb.lb_ratio / std::pow(ell.theta, dim / (4.0 * lb.sigma)));
    }
    return cal;
}

}  // namespace cge
