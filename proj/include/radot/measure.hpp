#pragma once

namespace radot {

/// A probability measure on radii, represented through its CDF and quantile
/// function. All transport machinery works against this interface, so
/// quadrature-backed measures, interpolants and piecewise-linear barycenter
/// quantiles are interchangeable.
class Measure1D {
public:
    virtual ~Measure1D() = default;

    /// F(r): nondecreasing, F(0) = 0, F(r_max()) >= 1 - tail mass.
    virtual double cdf(double r) const = 0;

    /// Q(u) = inf{ r : F(r) >= u }. Flat CDF regions map to their left edge.
    virtual double quantile(double u) const = 0;

    /// Right end of the (possibly truncated) support.
    virtual double r_max() const = 0;
};

} // namespace radot
