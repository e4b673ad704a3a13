#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cge/sym_mat.hpp"
#include "cge/triadic_grid.hpp"
#include "cge/variational_solver.hpp"

namespace cge {

/// Coarse-grained matrices of one cube. `amax` is the quadratic form of
/// a(Q, p) over the maximal cone (all of H^1 on Q).
struct CoarseGrainPair {
    TriadicCube cube;
    SymMat astar;
    SymMat amax;
    SymMat avg;          ///< (a)_Q
    SymMat inv_avg_inv;  ///< ((a^{-1})_Q)^{-1}
    /// d gradient solves followed by d flux solves; empty for single cells.
    std::vector<SolveStats> stats;
};

/// Solves the 2d cell problems on `cube`. Both matrices are assembled from
/// the second-order accurate polarization L_i(u_j) + L_j(u_i) - B(u_i, u_j).
CoarseGrainPair coarse_grain_cube(const CoefficientField& field, const TriadicCube& cube, const SolveConfig& config);

struct SweepOptions {
    SolveConfig solve;
    /// Per-cube records are read from and written to this directory when set.
    std::optional<std::filesystem::path> cache_dir;
    int threads = 1;
};

struct CubeFailure {
    TriadicCube cube;
    std::string message;
};

struct SweepResult {
    GridSpec grid;
    std::string field_hash;
    std::string config_key;
    /// levels[j] holds the cubes of level -j in partition order.
    std::vector<std::vector<CoarseGrainPair>> levels;
    /// Slots of failed cubes keep a default pair; see `failures`.
    std::vector<CubeFailure> failures;
    std::int64_t solves_performed = 0;
    std::int64_t cache_hits = 0;

    const std::vector<CoarseGrainPair>& at_level(int k) const;
    const CoarseGrainPair& at(const TriadicCube& cube) const;
    bool complete() const { return failures.empty(); }
    std::size_t pair_count() const;
};

/// Every cube pair on every level -N..0, computed as a parallel map.
SweepResult sweep(const CoefficientField& field, const SweepOptions& options);

/// Directory of a cube record inside the cache.
std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const CoefficientField& field,
                                 const SolveConfig& config, const TriadicCube& cube);

struct ScaleTerm {
    int level = 0;
    double amax_root = 0.0;      ///< max_z |a(z + box_k)|^{1/2}
    double astar_inv_root = 0.0; ///< max_z |a_*^{-1}(z + box_k)|^{1/2}
    double weight_s = 0.0;       ///< c_s 3^{-s(m-k)}
    double weight_t = 0.0;
};

struct EllipticityReport {
    int dim = 0;
    TriadicCube cube;
    double s = 0.0;
    double t = 0.0;
    double c_s = 0.0;
    double c_t = 0.0;
    double Lambda_s = 0.0;
    double lambda_t = 0.0;
    double theta = 0.0;
    std::vector<ScaleTerm> terms;  ///< levels m down to -N
    /// Contributions of the levels below -N to the two weighted sums.
    double tail_Lambda = 0.0;
    double tail_lambda = 0.0;
};

/// Lambda_s, lambda_t and Theta for `cube` (the root by default). Levels below
/// the grid are summed in closed form from the finest-level maxima.
EllipticityReport ellipticity_constants(const SweepResult& result, double s, double t);
EllipticityReport ellipticity_constants(const SweepResult& result, const TriadicCube& cube, double s, double t);

struct AuditViolation {
    std::string check;
    TriadicCube cube;
    double magnitude = 0.0;  ///< amount by which the inequality fails, before slack
    double slack = 0.0;
};

struct AuditReport {
    int dim = 0;
    std::int64_t checks = 0;
    double max_excess = 0.0;  ///< largest (magnitude - slack) seen, may be negative
    std::vector<AuditViolation> violations;
    bool ok() const { return violations.empty(); }
};

struct AuditOptions {
    double relative_slack = 1e-7;
    std::vector<double> s_grid{0.1, 0.3, 0.5, 0.7, 0.9};
};

/// Chain ((a^{-1})_Q)^{-1} <= a_* <= a <= (a)_Q per cube, subadditivity of a and
/// a_*^{-1} over children, monotonicity in s, Theta >= 1 and the scaling bounds.
AuditReport audit(const SweepResult& result, const AuditOptions& options = {});

}  // namespace cge
