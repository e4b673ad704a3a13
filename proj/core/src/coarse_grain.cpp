#include "cge/coarse_grain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace cge {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

SymMat polarized(int dim, const std::vector<Vec>& load, const std::vector<ScalarGridFunction>& u,
                 const CoefficientField& field, const TriadicCube& cube) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            const double b = bilinear_form(field, cube, u[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(j)]);
            m.set(i, j, load[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] +
                            load[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - b);
        }
    }
    return m;
}

// Cache record: "CGP1", u32 dim, u32 stat count, 4 matrices, then per solve
// i64 iterations, f64 residual, i64 unknowns, f64 seconds. Host byte order.
constexpr char kRecordMagic[4] = {'C', 'G', 'P', '1'};

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
bool take(const std::string& in, std::size_t& pos, T& v) {
    if (pos + sizeof(T) > in.size()) return false;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return true;
}

std::string encode_pair(const CoarseGrainPair& p) {
    std::string out(kRecordMagic, 4);
    const int dim = p.astar.dim();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.stats.size()));
    for (const SymMat* m : {&p.astar, &p.amax, &p.avg, &p.inv_avg_inv}) {
        for (double c : m->components()) put(out, c);
    }
    for (const SolveStats& s : p.stats) {
        put(out, s.iterations);
        put(out, s.relative_residual);
        put(out, s.unknowns);
        put(out, s.wall_seconds);
    }
    return out;
}

std::optional<CoarseGrainPair> decode_pair(const std::string& in, const TriadicCube& cube, int dim) {
    if (in.size() < 12 || std::memcmp(in.data(), kRecordMagic, 4) != 0) return std::nullopt;
    std::size_t pos = 4;
    std::uint32_t d = 0, n = 0;
    take(in, pos, d);
    take(in, pos, n);
    if (static_cast<int>(d) != dim || n > 2 * kMaxDim) return std::nullopt;
    CoarseGrainPair p;
    p.cube = cube;
    for (SymMat* m : {&p.astar, &p.amax, &p.avg, &p.inv_avg_inv}) {
        double comps[6];
        for (std::size_t c = 0; c < sym_components(dim); ++c) {
            if (!take(in, pos, comps[c])) return std::nullopt;
        }
        *m = SymMat::from_components(dim, std::span<const double>(comps, sym_components(dim)));
    }
    p.stats.resize(n);
    for (SolveStats& s : p.stats) {
        if (!take(in, pos, s.iterations) || !take(in, pos, s.relative_residual) || !take(in, pos, s.unknowns) ||
            !take(in, pos, s.wall_seconds)) {
            return std::nullopt;
        }
    }
    if (pos != in.size()) return std::nullopt;
    return p;
}

std::optional<CoarseGrainPair> load_record(const std::filesystem::path& path, const TriadicCube& cube, int dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_pair(bytes, cube, dim);
}

void store_record(const std::filesystem::path& path, const CoarseGrainPair& p) {
    std::filesystem::create_directories(path.parent_path());
    std::ostringstream tag;
    tag << std::this_thread::get_id();
    const std::filesystem::path tmp = path.string() + ".tmp." + tag.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        const std::string bytes = encode_pair(p);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("cannot write cache record " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Per-cube square-rooted norms, indexed like SweepResult::levels.
struct NormTable {
    std::vector<std::vector<double>> amax_root;
    std::vector<std::vector<double>> astar_inv_root;
};

NormTable build_norms(const SweepResult& r) {
    if (!r.complete()) {
        throw Error("sweep has " + std::to_string(r.failures.size()) + " failed cubes; first: " +
                    r.failures.front().cube.id() + ": " + r.failures.front().message);
    }
    NormTable t;
    for (const auto& level : r.levels) {
        std::vector<double> a, b;
        a.reserve(level.size());
        b.reserve(level.size());
        for (const CoarseGrainPair& p : level) {
            a.push_back(std::sqrt(p.amax.norm()));
            b.push_back(std::sqrt(1.0 / p.astar.min_eigenvalue()));
        }
        t.amax_root.push_back(std::move(a));
        t.astar_inv_root.push_back(std::move(b));
    }
    return t;
}

void check_exponent(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream os;
        os << name << " = " << v << " outside (0,1)";
        throw RangeError(os.str());
    }
}

EllipticityReport constants_from(const SweepResult& r, const NormTable& norms, const TriadicCube& cube, double s,
                                 double t) {
    check_exponent(s, "s");
    check_exponent(t, "t");
    const GridSpec& grid = r.grid;
    validate_cube(grid, cube);
    EllipticityReport rep;
    rep.dim = grid.dim;
    rep.cube = cube;
    rep.s = s;
    rep.t = t;
    rep.c_s = 1.0 - std::pow(3.0, -s);
    rep.c_t = 1.0 - std::pow(3.0, -t);
    const int m = cube.level;
    double sum_a = 0.0, sum_b = 0.0;
    double last_a = 0.0, last_b = 0.0;
    for (int k = m; k >= -grid.level; --k) {
        const std::int64_t f = ipow3(m - k);
        const std::int64_t per_side = ipow3(-k);
        const auto& la = norms.amax_root[static_cast<std::size_t>(-k)];
        const auto& lb = norms.astar_inv_root[static_cast<std::size_t>(-k)];
        double ma = 0.0, mb = 0.0;
        std::int64_t count = 1;
        for (int a = 0; a < grid.dim; ++a) count *= f;
        Index local{};
        for (std::int64_t c = 0; c < count; ++c) {
            Index off{};
            for (int a = 0; a < grid.dim; ++a) off[a] = cube.offset[a] * f + local[a];
            const auto lin = static_cast<std::size_t>(grid.linear(off, per_side));
            ma = std::max(ma, la[lin]);
            mb = std::max(mb, lb[lin]);
            for (int a = grid.dim - 1; a >= 0; --a) {
                if (++local[a] < f) break;
                local[a] = 0;
            }
        }
        ScaleTerm term;
        term.level = k;
        term.amax_root = ma;
        term.astar_inv_root = mb;
        term.weight_s = rep.c_s * std::pow(3.0, -s * (m - k));
        term.weight_t = rep.c_t * std::pow(3.0, -t * (m - k));
        sum_a += term.weight_s * ma;
        sum_b += term.weight_t * mb;
        last_a = ma;
        last_b = mb;
        rep.terms.push_back(term);
    }
    // Below the grid every cube is a piece of one cell, so the maxima stay at
    // the finest-level values and c Σ_{j > m+N} 3^{-s j} = 3^{-s (m+N+1)}.
    rep.tail_Lambda = last_a * std::pow(3.0, -s * (m + grid.level + 1));
    rep.tail_lambda = last_b * std::pow(3.0, -t * (m + grid.level + 1));
    sum_a += rep.tail_Lambda;
    sum_b += rep.tail_lambda;
    rep.Lambda_s = sum_a * sum_a;
    rep.lambda_t = 1.0 / (sum_b * sum_b);
    rep.theta = rep.Lambda_s / rep.lambda_t;
    return rep;
}

}  // namespace

CoarseGrainPair coarse_grain_cube(const CoefficientField& field, const TriadicCube& cube, const SolveConfig& config) {
    const GridSpec& grid = field.grid();
    validate_cube(grid, cube);
    CoarseGrainPair p;
    p.cube = cube;
    p.avg = cube_average(field, cube, false);
    p.inv_avg_inv = cube_average(field, cube, true).inverse();
    if (cube.level == -grid.level) {
        p.astar = p.avg;
        p.amax = p.avg;
        p.inv_avg_inv = p.avg;
        return p;
    }
    const int dim = grid.dim;
    const StiffnessOperator op = assemble(field, cube, config);
    for (Forcing kind : {Forcing::gradient, Forcing::flux}) {
        std::vector<ScalarGridFunction> u;
        std::vector<Vec> load;
        for (int i = 0; i < dim; ++i) {
            double e[kMaxDim] = {0.0, 0.0, 0.0};
            e[i] = 1.0;
            ForcingSolution sol = solve_linear_forcing(op, field, std::span<const double>(e, static_cast<std::size_t>(dim)),
                                                       kind, config);
            p.stats.push_back(sol.stats);
            load.push_back(kind == Forcing::gradient ? average_gradient(sol.u) : average_flux(field, sol.u));
            u.push_back(std::move(sol.u));
        }
        const SymMat m = polarized(dim, load, u, field, cube);
        if (kind == Forcing::gradient) {
            try {
                p.astar = m.inverse();
            } catch (const DegenerateFieldError& e) {
                throw DegenerateFieldError("a_*^{-1} on " + cube.id() + " is singular: " + e.what());
            }
        } else {
            p.amax = m;
        }
    }
    return p;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const CoefficientField& field,
                                 const SolveConfig& config, const TriadicCube& cube) {
    return cache_dir / field.content_hash_hex() / hex64(fnv1a(config.key())) / ("level_" + std::to_string(cube.level)) /
           (std::to_string(cube.linear_offset(field.grid())) + ".bin");
}

const std::vector<CoarseGrainPair>& SweepResult::at_level(int k) const {
    if (k > 0 || -k >= static_cast<int>(levels.size())) {
        throw RangeError("level " + std::to_string(k) + " not in sweep");
    }
    return levels[static_cast<std::size_t>(-k)];
}

const CoarseGrainPair& SweepResult::at(const TriadicCube& cube) const {
    validate_cube(grid, cube);
    return at_level(cube.level)[static_cast<std::size_t>(cube.linear_offset(grid))];
}

std::size_t SweepResult::pair_count() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
}

SweepResult sweep(const CoefficientField& field, const SweepOptions& options) {
    options.solve.validate();
    if (options.threads < 1) throw ConfigError("threads must be at least 1");
    const GridSpec& grid = field.grid();
    SweepResult r;
    r.grid = grid;
    r.field_hash = field.content_hash_hex();
    r.config_key = options.solve.key();

    std::vector<TriadicCube> jobs;
    for (int j = 0; j <= grid.level; ++j) {
        auto cubes = partition(grid, -j);
        r.levels.emplace_back(cubes.size());
        jobs.insert(jobs.end(), cubes.begin(), cubes.end());
    }
    // Coarsest cubes are the most expensive; they go first.
    std::vector<std::optional<std::string>> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::int64_t> solves{0}, hits{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const TriadicCube& cube = jobs[i];
            CoarseGrainPair& slot = r.levels[static_cast<std::size_t>(-cube.level)]
                                            [static_cast<std::size_t>(cube.linear_offset(grid))];
            try {
                std::optional<std::filesystem::path> path;
                if (options.cache_dir) {
                    path = cache_path(*options.cache_dir, field, options.solve, cube);
                    if (auto cached = load_record(*path, cube, grid.dim)) {
                        slot = std::move(*cached);
                        hits.fetch_add(1);
                        continue;
                    }
                }
                slot = coarse_grain_cube(field, cube, options.solve);
                solves.fetch_add(static_cast<std::int64_t>(slot.stats.size()));
                if (path) store_record(*path, slot);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                slot = CoarseGrainPair{};
                slot.cube = cube;
            }
        }
    };
    const int nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.threads), jobs.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i]) r.failures.push_back({jobs[i], *errors[i]});
    }
    r.solves_performed = solves.load();
    r.cache_hits = hits.load();
    return r;
}

EllipticityReport ellipticity_constants(const SweepResult& result, double s, double t) {
    return ellipticity_constants(result, TriadicCube::root(), s, t);
}

EllipticityReport ellipticity_constants(const SweepResult& result, const TriadicCube& cube, double s, double t) {
    return constants_from(result, build_norms(result), cube, s, t);
}

AuditReport audit(const SweepResult& result, const AuditOptions& options) {
    const NormTable norms = build_norms(result);
    const GridSpec& grid = result.grid;
    const double rel = options.relative_slack;
    AuditReport rep;
    rep.dim = grid.dim;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    auto check = [&](const std::string& name, const TriadicCube& cube, double magnitude, double scale) {
        const double slack = rel * scale;
        ++rep.checks;
        rep.max_excess = std::max(rep.max_excess, magnitude - slack);
        if (magnitude > slack) rep.violations.push_back({name, cube, magnitude, slack});
    };

    for (const auto& level : result.levels) {
        for (const CoarseGrainPair& p : level) {
            const double scale = std::max({p.avg.norm(), p.amax.norm(), p.astar.norm()});
            check("chain: ((a^-1)_Q)^-1 <= a_*", p.cube, loewner_excess(p.inv_avg_inv, p.astar), scale);
            check("a_* <= a", p.cube, loewner_excess(p.astar, p.amax), scale);
            check("chain: a <= (a)_Q", p.cube, loewner_excess(p.amax, p.avg), scale);
            if (p.cube.level == -grid.level) continue;
            SymMat mean_a(grid.dim), mean_inv(grid.dim);
            const auto kids = children(grid, p.cube);
            for (const TriadicCube& c : kids) {
                const CoarseGrainPair& q = result.at(c);
                mean_a += q.amax;
                mean_inv += q.astar.inverse();
            }
            mean_a *= 1.0 / static_cast<double>(kids.size());
            mean_inv *= 1.0 / static_cast<double>(kids.size());
            check("subadditivity of a", p.cube, loewner_excess(p.amax, mean_a), std::max(p.amax.norm(), mean_a.norm()));
            const SymMat inv = p.astar.inverse();
            check("subadditivity of a_*^-1", p.cube, loewner_excess(inv, mean_inv), std::max(inv.norm(), mean_inv.norm()));
        }
    }

    std::vector<double> grid_s = options.s_grid;
    std::sort(grid_s.begin(), grid_s.end());
    const TriadicCube root = TriadicCube::root();
    std::vector<EllipticityReport> at_s;
    for (double s : grid_s) at_s.push_back(constants_from(result, norms, root, s, s));
    for (std::size_t i = 0; i < grid_s.size(); ++i) {
        for (std::size_t j = i + 1; j < grid_s.size(); ++j) {
            const auto& lo = at_s[i];
            const auto& hi = at_s[j];
            check("monotone: lambda_s <= lambda_t", root, lo.lambda_t - hi.lambda_t, hi.lambda_t);
            check("monotone: Lambda_t <= Lambda_s", root, hi.Lambda_s - lo.Lambda_s, lo.Lambda_s);
        }
        check("monotone: lambda_t <= Lambda_t", root, at_s[i].lambda_t - at_s[i].Lambda_s, at_s[i].Lambda_s);
        for (double t : grid_s) {
            const auto r = constants_from(result, norms, root, grid_s[i], t);
            check("theta >= 1", root, 1.0 - r.theta, 1.0);
        }
    }

    for (std::size_t i = 0; i < grid_s.size(); ++i) {
        const double s = grid_s[i];
        const auto& top = at_s[i];
        for (int k = -1; k >= -grid.level; --k) {
            double max_L = 0.0, max_inv = 0.0;
            for (const TriadicCube& c : partition(grid, k)) {
                const auto r = constants_from(result, norms, c, s, s);
                max_L = std::max(max_L, r.Lambda_s);
                max_inv = std::max(max_inv, 1.0 / r.lambda_t);
            }
            const double bound_L = std::pow(3.0, -2.0 * s * k) * top.Lambda_s;
            const double bound_inv = std::pow(3.0, -2.0 * s * k) / top.lambda_t;
            const TriadicCube tag{k, {}};
            check("scaling of Lambda_s", tag, max_L - bound_L, bound_L);
            check("scaling of lambda_s^-1", tag, max_inv - bound_inv, bound_inv);
        }
    }
    return rep;
}

}  // namespace cge
