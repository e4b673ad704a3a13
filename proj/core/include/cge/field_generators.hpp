#pragma once

#include <cstdint>
#include <vector>

#include "cge/triadic_grid.hpp"

namespace cge {

/// Spike profile f = sum_{k=1}^{k_max} A_k 1_{(0, l_k)}(x_1) with
/// A_k = 3^{k^2} and l_k = 3^{-k} 3^{alpha k} / A_k.
struct LayeredParams {
    double alpha = 0.5;
    int k_max = 1;

    double amplitude(int k) const;       ///< A_k
    double interval_length(int k) const; ///< l_k
    /// A_k * l_k = 3^{-(1-alpha) k}, computed without forming A_k.
    double spike_mass(int k) const;
    /// Exact integral of f over (0,1).
    double total_mass() const;
    void validate() const;
};

/// Product Cantor construction: at each generation keep `retained` of the
/// three triadic digits per axis (middle thirds removed by default).
struct CantorParams {
    int generation = 1;
    std::vector<int> retained{0, 2};

    /// Hausdorff dimension d * log(#retained) / log 3.
    double hausdorff_dimension(int dim) const;
    void validate(int dim) const;
};

/// Triadic multiplicative cascade: one lognormal multiplier
/// W = exp(gamma G - gamma^2 v / 2), G ~ N(0, v), v = log 3, per triadic
/// cell and level; the density at generation n is the product of the n
/// ancestor multipliers.
struct CascadeParams {
    double gamma = 0.5;
    int generation = 1;
    std::uint64_t seed = 0;

    static double level_variance();
    void validate(int dim) const;
};

CoefficientField gen_constant(const GridSpec& grid, const SymMat& matrix);

/// Scalar laminate a(x_axis) with equal-width stripes over [0,1). When the
/// stripe count does not divide 3^N, cells cut by a stripe boundary carry the
/// overlap-weighted mean of the stripe values.
CoefficientField gen_laminate(const GridSpec& grid, int axis, const std::vector<double>& values);

/// Cell averages of the raw spike profile f(x_1) (not positive definite).
ScalarGridFunction layered_density(const GridSpec& grid, const LayeredParams& params);
/// Scalar field 1 + f(x_1).
CoefficientField gen_layered_example(const GridSpec& grid, const LayeredParams& params);

/// Box-mollified Cantor measure density: (3/r)^{d n} on the r^{d n}
/// surviving generation-n cells, 0 elsewhere; total mass 1.
ScalarGridFunction cantor_density(const GridSpec& grid, const CantorParams& params);
CoefficientField gen_cantor_field(const GridSpec& grid, const CantorParams& params);

ScalarGridFunction cascade_density(const GridSpec& grid, const CascadeParams& params);
CoefficientField gen_cascade_field(const GridSpec& grid, const CascadeParams& params);

/// Scalar field 1 + density, used by the Cantor, cascade and layered examples.
CoefficientField unit_shifted(const ScalarGridFunction& density, std::string descriptor);

/// Random SPD matrix field: each cell gets eigenvalues log-uniform in
/// [lo, hi] and a random orientation (counter-based, keyed by seed).
CoefficientField gen_random_spd(const GridSpec& grid, double lo, double hi, std::uint64_t seed,
                                bool diagonal = false);

/// Cell-volume integral of |f|^p (p = 1 gives the mass).
double lp_mass(const ScalarGridFunction& cells, double p);

}  // namespace cge
