#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cge/coarse_grain.hpp"
#include "cge/triadic_grid.hpp"

namespace cge {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hoelder conjugate with 1' = inf and inf' = 1.
double conjugate_exponent(double p);

/// sup_n 3^{-s n} (avg_z ffl_{z+box_n} |f - (f)_{z+box_n}|^p)^{1/p} over the
/// overlapping cubes with corners on the lattice 3^{n-1} Z^d, for the scales
/// -N+1 <= n <= 0 whose shifts are grid aligned. `f` is cell sampled on the root.
double besov_seminorm(const ScalarGridFunction& f, double s, double p);

struct DualSumTerm {
    int level = 0;
    double inner = 0.0;     ///< (avg_z |(f)_{z+box_k}|^{p'})^{1/p'}, or the max for p' = inf
    double weighted = 0.0;  ///< 3^{s k} inner
};

struct DualSumResult {
    std::vector<DualSumTerm> terms;  ///< levels 0 down to -N
    double tail = 0.0;               ///< levels below -N in closed form
    double total = 0.0;
};

/// sum_{k <= 0} 3^{s k} (avg_z |(f)_{z+box_k}|^{p'})^{1/p'} over the partition
/// at every level. Below the grid the averages are the cell values.
DualSumResult dual_sum_norm(const ScalarGridFunction& f, double s, double p_conj);

/// max_z |(f)_{z+box_k}| for every level k = 0..-N (index -k).
std::vector<double> level_maxima(const ScalarGridFunction& f);

enum class Component { a, a_inv };

struct DiscountedTerm {
    int level = 0;
    double max_root = 0.0;  ///< max_z |(a)_{z+box_k}|^{1/2} (or of a^{-1})
    double weight = 0.0;    ///< c_s 3^{s k}
};

struct DiscountedAverages {
    double s = 0.0;
    Component component = Component::a;
    std::vector<DiscountedTerm> terms;
    double tail = 0.0;
    /// (c_s sum_k 3^{s k} max_z |(a)_{z+box_k}|^{1/2})^2; bounds Lambda_s from
    /// above (a) or lambda_s^{-1} from above (a_inv).
    double total = 0.0;
};

DiscountedAverages scale_discounted_averages(const CoefficientField& field, double s, Component component);

/// Largest grid accepted by fractional_seminorm (3^{dN} cells).
inline constexpr std::int64_t kFractionalCellLimit = 59049;

/// (sum_{x != y} |f(x) - f(y)|^p / |x - y|^{d + s p} h^{2d})^{1/p} over cell midpoints.
double fractional_seminorm(const ScalarGridFunction& f, double s, double p);

struct CriterionInput {
    double p = kInfinity;
    double q = kInfinity;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Exponent bookkeeping; needs only the dimension.
struct CriterionExponents {
    int dim = 2;
    double sigma_tilde = 0.0;
    bool satisfied = false;
    double epsilon = 0.0;
    double s = 0.0;
    double t = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    std::vector<std::string> notes;
};

CriterionExponents criterion_exponents(int dim, const CriterionInput& input);

struct CriterionReport {
    CriterionInput input;
    CriterionExponents exponents;
    /// Only filled when the criterion holds.
    std::optional<DiscountedAverages> a_terms;
    std::optional<DiscountedAverages> a_inv_terms;
    double theta_bound = kInfinity;    ///< a_terms.total * a_inv_terms.total
    double prefactor = 0.0;            ///< c_s^2 c_t^2 / (c_sigma1^2 c_sigma2^2)
    std::optional<double> theta_solver;
};

/// Evaluates the criterion and its surrogate bound; `sweep` (optional) adds
/// the solver-based Theta_{s,t} for comparison.
CriterionReport sobolev_criterion_report(const CoefficientField& field, const CriterionInput& input,
                                         const SweepResult* sweep = nullptr);

}  // namespace cge
