#pragma once

#include <memory>
#include <span>
#include <vector>

#include "radot/measure.hpp"
#include "radot/profile.hpp"

namespace radot {

/// A radially contoured law in quantile representation: a center plus the
/// 1D measure of radii. Distributions, McCann interpolants and barycenters
/// all reduce to this.
struct RadialLaw {
    std::vector<double> center;
    std::shared_ptr<const Measure1D> measure;

    int dim() const { return static_cast<int>(center.size()); }
};

RadialLaw to_law(const RadialDistribution& dist);

/// The monotone rearrangement C(r) = Q_target(F_source(r)) matching the two
/// radial CDFs. Where the target CDF is flat, C takes the left endpoint of
/// the flat region; C(0) is the left edge of the target support.
class RadialMap {
public:
    RadialMap(std::shared_ptr<const Measure1D> source,
              std::shared_ptr<const Measure1D> target);

    double operator()(double r) const;
    std::vector<double> operator()(std::span<const double> radii) const;

    const Measure1D& source() const { return *source_; }
    const Measure1D& target() const { return *target_; }
    std::shared_ptr<const Measure1D> source_ptr() const { return source_; }
    std::shared_ptr<const Measure1D> target_ptr() const { return target_; }

private:
    std::shared_ptr<const Measure1D> source_;
    std::shared_ptr<const Measure1D> target_;
};

/// T(x) = C(||x - m0||)/||x - m0|| (x - m0) + m1, with T(m0) = m1.
class MongeMap {
public:
    MongeMap(std::vector<double> m0, std::vector<double> m1, RadialMap c);

    std::vector<double> operator()(std::span<const double> x) const;
    /// Row-major n x d point array in, same layout out.
    std::vector<double> apply(std::span<const double> points,
                              std::size_t n) const;

    const RadialMap& radial_map() const { return radial_; }
    const std::vector<double>& source_center() const { return m0_; }
    const std::vector<double>& target_center() const { return m1_; }

private:
    std::vector<double> m0_, m1_;
    RadialMap radial_;
};

RadialMap radial_rearrangement(const RadialDistribution& mu0,
                               const RadialDistribution& mu1);
MongeMap monge_map(const RadialDistribution& mu0,
                   const RadialDistribution& mu1);

/// W2 between two measures on radii: sqrt(int_0^1 (Qa - Qb)^2 du).
double w2_radial(const Measure1D& a, const Measure1D& b);

/// W2 between two radial laws:
/// sqrt(||m0 - m1||^2 + w2_radial(measures)^2).
double w2_distance(const RadialLaw& a, const RadialLaw& b);
double w2_distance(const RadialDistribution& mu0,
                   const RadialDistribution& mu1);

/// Quantile-composed displacement interpolant:
/// Q_t = (1-t) Q0 + t Q1, center m_t = (1-t) m0 + t m1.
class InterpolantMeasure final : public Measure1D {
public:
    InterpolantMeasure(std::shared_ptr<const Measure1D> a,
                       std::shared_ptr<const Measure1D> b, double t);

    double quantile(double u) const override;
    double cdf(double r) const override;
    double r_max() const override;

private:
    std::shared_ptr<const Measure1D> a_, b_;
    double t_;
};

RadialLaw mccann_interpolate(const RadialDistribution& mu0,
                             const RadialDistribution& mu1, double t);
RadialLaw mccann_interpolate(const RadialLaw& mu0, const RadialLaw& mu1,
                             double t);

/// Central-difference derivative of the CDF, step h = r_max * 1e-5.
/// Interpolant densities carry no smoothness promise; this is best-effort.
double numerical_density(const Measure1D& m, double r);

} // namespace radot
