#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radot/measure.hpp"

namespace radot {

/// Numeric tolerances shared across the library.
namespace tol {
inline constexpr double quad = 1e-10;      // relative quadrature target
inline constexpr double tail_eps = 1e-12;  // mass allowed beyond r_max
inline constexpr double quantile = 1e-10;  // in r, relative to r_max
inline constexpr double map = 1e-8;        // pushforward identity defect
inline constexpr double atom_eps = 1e-6;   // u-length threshold for atoms
inline constexpr double residual = 1e-6;   // barycenter fixed-point defect
} // namespace tol

/// Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
double sphere_surface(int dim);

/// A radial generator function rho on r >= 0 together with the dimension it
/// lives in. Moment integrals and the tail truncation radius are computed at
/// construction; instances are immutable and cheap to copy.
class RadialProfile {
public:
    using Generator = std::function<double(double)>;

    /// General constructor. `support_end` is +inf unless the generator is
    /// identically zero beyond a known radius; `breakpoints` mark kinks the
    /// quadrature should subdivide at.
    RadialProfile(Generator generator, int dim,
                  std::vector<double> breakpoints = {},
                  double support_end =
                      std::numeric_limits<double>::infinity(),
                  std::string family = "custom");

    static RadialProfile gaussian(int dim);
    static RadialProfile exponential(int dim);
    static RadialProfile student(int dim, double p);
    static RadialProfile bump(int dim);
    /// Piecewise-linear generator through the sample points (r, rho);
    /// r must be strictly increasing and start at 0, rho nonnegative.
    static RadialProfile tabulated(int dim, std::vector<double> r,
                                   std::vector<double> rho);

    double operator()(double r) const;
    int dim() const;
    const std::string& family() const;

    /// Radius beyond which the scale-1 radial measure carries mass
    /// <= tol::tail_eps.
    double tail_radius() const;
    /// int_0^inf r^{d-1} rho(r) dr.
    double mass_integral() const;
    /// int_0^inf r^{d+1} rho(r) dr / mass_integral().
    double second_moment_ratio() const;
    const std::vector<double>& breakpoints() const;
    double support_end() const;
    /// Shape parameter of parametric families (the student p); NaN otherwise.
    double family_param() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// mu = R_d(m, c, rho): density rho(||x - m|| / c) / Z.
struct RadialDistribution {
    std::vector<double> center;
    double scale;
    RadialProfile profile;

    RadialDistribution(std::vector<double> center, double scale,
                       RadialProfile profile);

    int dim() const { return profile.dim(); }
    /// Normalized density at a point.
    double density(std::span<const double> x) const;
};

/// The induced probability measure on radii, with density proportional to
/// r^{d-1} rho(r/c). CDF values are computed by cumulative adaptive
/// quadrature against a cached node grid; quantiles by bracketed bisection
/// with a Newton polish.
class RadialMeasure final : public Measure1D {
public:
    RadialMeasure(RadialProfile profile, double scale);

    double cdf(double r) const override;
    double quantile(double u) const override;
    double r_max() const override;
    /// dF/dr, the normalized radial density.
    double density(double r) const;

    const RadialProfile& profile() const { return profile_; }
    double scale() const { return scale_; }

private:
    RadialProfile profile_;
    double scale_;
    double mass_;  // scale-1 mass integral
    double t_max_; // scale-1 truncation radius
    std::vector<double> nodes_; // scale-1 radii
    std::vector<double> cum_;   // cumulative mass at nodes_
    double cdf_t(double t) const;
};

double normalizer(const RadialProfile& profile, double scale);
double covariance_scalar(const RadialDistribution& dist);
RadialMeasure radial_measure(const RadialDistribution& dist);
std::vector<double> mean(const RadialDistribution& dist);

} // namespace radot
