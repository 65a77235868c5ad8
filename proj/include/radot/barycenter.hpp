#pragma once

#include <memory>
#include <vector>

#include "radot/measure.hpp"
#include "radot/transport.hpp"

namespace radot {

struct Atom {
    double radius;
    double mass;
};

/// A monotone piecewise-linear quantile function on a graded u-grid.
/// Serves both as the stored form of barycenter measures and as the
/// quantile/CDF pair of their continuous parts.
class PiecewiseQuantile final : public Measure1D {
public:
    PiecewiseQuantile(std::vector<double> u, std::vector<double> q);

    double quantile(double u) const override;
    /// Right-continuous inverse; atoms show up as jumps.
    double cdf(double r) const override;
    double r_max() const override;

    const std::vector<double>& ugrid() const { return u_; }
    const std::vector<double>& values() const { return q_; }

private:
    std::vector<double> u_, q_;
};

/// Radial measure with a possible singular part: the full quantile plus the
/// detected atoms and the renormalized continuous remainder.
struct GeneralizedRadialMeasure {
    std::shared_ptr<const PiecewiseQuantile> quantile;
    std::vector<Atom> atoms;
    std::shared_ptr<const PiecewiseQuantile> continuous_part;

    double atom_mass() const;
};

struct BarycenterResult {
    std::vector<double> center;
    GeneralizedRadialMeasure measure;
    /// u-integrated squared defect of sum_j lambda_j C_{*->j} = id,
    /// normalized by r_max^2.
    double residual;
    std::vector<double> weights;

    RadialLaw law() const { return RadialLaw{center, measure.quantile}; }
};

/// Chebyshev-like graded grid on [0,1], clustered at both endpoints.
std::vector<double> graded_ugrid(int n = 4096);

/// Wasserstein barycenter by quantile averaging: Q*(u) = sum_j lambda_j Q_j(u).
/// The optimality condition sum_j lambda_j T_{*->j} = id is re-checked through
/// the returned residual rather than trusted.
BarycenterResult radial_barycenter(const std::vector<RadialLaw>& laws,
                                   const std::vector<double>& weights,
                                   int grid_points = 4096);
BarycenterResult radial_barycenter(const std::vector<RadialDistribution>& dists,
                                   const std::vector<double>& weights,
                                   int grid_points = 4096);

/// sum_j lambda_j W2(mu_j, candidate)^2.
double barycenter_functional(const RadialLaw& candidate,
                             const std::vector<RadialLaw>& laws,
                             const std::vector<double>& weights);

/// Maximal u-intervals of constancy of Q* with length >= tol::atom_eps.
std::vector<Atom> detect_atoms(const PiecewiseQuantile& q);
std::vector<Atom> detect_atoms(const GeneralizedRadialMeasure& m);

} // namespace radot
