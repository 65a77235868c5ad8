#include "radot/transport.hpp"

#include <algorithm>
#include <cmath>

#include "radot/errors.hpp"
#include "radot/quadrature.hpp"

namespace radot {

RadialLaw to_law(const RadialDistribution& dist) {
    return RadialLaw{dist.center,
                     std::make_shared<RadialMeasure>(dist.profile,
                                                     dist.scale)};
}

RadialMap::RadialMap(std::shared_ptr<const Measure1D> source,
                     std::shared_ptr<const Measure1D> target)
    : source_(std::move(source)), target_(std::move(target)) {
    if (!source_ || !target_) throw InputError("RadialMap: null measure");
}

double RadialMap::operator()(double r) const {
    return target_->quantile(source_->cdf(r));
}

std::vector<double> RadialMap::operator()(
    std::span<const double> radii) const {
    std::vector<double> out(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) out[i] = (*this)(radii[i]);
    return out;
}

MongeMap::MongeMap(std::vector<double> m0, std::vector<double> m1, RadialMap c)
    : m0_(std::move(m0)), m1_(std::move(m1)), radial_(std::move(c)) {
    if (m0_.size() != m1_.size())
        throw InputError("MongeMap: center dimension mismatch");
}

std::vector<double> MongeMap::operator()(std::span<const double> x) const {
    if (x.size() != m0_.size())
        throw InputError("MongeMap: point dimension mismatch");
    std::size_t d = m0_.size();
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double dx = x[i] - m0_[i];
        r2 += dx * dx;
    }
    double r = std::sqrt(r2);
    std::vector<double> out(d);
    if (r == 0.0) {
        // removable singularity at the source center: T(m0) = m1
        return m1_;
    }
    double ratio = radial_(r) / r;
    for (std::size_t i = 0; i < d; ++i)
        out[i] = ratio * (x[i] - m0_[i]) + m1_[i];
    return out;
}

std::vector<double> MongeMap::apply(std::span<const double> points,
                                    std::size_t n) const {
    std::size_t d = m0_.size();
    if (points.size() != n * d)
        throw InputError("MongeMap::apply: point array size mismatch");
    std::vector<double> out(points.size());
    for (std::size_t k = 0; k < n; ++k) {
        auto y = (*this)(points.subspan(k * d, d));
        std::copy(y.begin(), y.end(), out.begin() + k * d);
    }
    return out;
}

RadialMap radial_rearrangement(const RadialDistribution& mu0,
                               const RadialDistribution& mu1) {
    if (mu0.dim() != mu1.dim())
        throw InputError("radial_rearrangement: dimension mismatch");
    return RadialMap(
        std::make_shared<RadialMeasure>(mu0.profile, mu0.scale),
        std::make_shared<RadialMeasure>(mu1.profile, mu1.scale));
}

MongeMap monge_map(const RadialDistribution& mu0,
                   const RadialDistribution& mu1) {
    return MongeMap(mu0.center, mu1.center, radial_rearrangement(mu0, mu1));
}

double w2_radial(const Measure1D& a, const Measure1D& b) {
    double scale = std::max(a.r_max(), b.r_max());
    auto integrand = [&](double u) {
        double d = a.quantile(u) - b.quantile(u);
        return d * d;
    };
    QuadResult r = integrate_adaptive(integrand, 0.0, 1.0, 1e-11,
                                      1e-16 * scale * scale, 4000);
    return std::sqrt(std::max(r.value, 0.0));
}

double w2_distance(const RadialLaw& a, const RadialLaw& b) {
    if (a.center.size() != b.center.size())
        throw InputError("w2_distance: dimension mismatch");
    double m2 = 0.0;
    for (std::size_t i = 0; i < a.center.size(); ++i) {
        double d = a.center[i] - b.center[i];
        m2 += d * d;
    }
    double wr = w2_radial(*a.measure, *b.measure);
    return std::sqrt(m2 + wr * wr);
}

double w2_distance(const RadialDistribution& mu0,
                   const RadialDistribution& mu1) {
    if (mu0.dim() != mu1.dim())
        throw InputError("w2_distance: dimension mismatch");
    return w2_distance(to_law(mu0), to_law(mu1));
}

InterpolantMeasure::InterpolantMeasure(std::shared_ptr<const Measure1D> a,
                                       std::shared_ptr<const Measure1D> b,
                                       double t)
    : a_(std::move(a)), b_(std::move(b)), t_(t) {
    if (!a_ || !b_) throw InputError("InterpolantMeasure: null measure");
    if (!(t >= 0.0 && t <= 1.0))
        throw InputError("InterpolantMeasure: t must lie in [0, 1]");
}

double InterpolantMeasure::quantile(double u) const {
    return (1.0 - t_) * a_->quantile(u) + t_ * b_->quantile(u);
}

double InterpolantMeasure::r_max() const {
    return (1.0 - t_) * a_->r_max() + t_ * b_->r_max();
}

double InterpolantMeasure::cdf(double r) const {
    // invert the monotone quantile
    if (r <= quantile(0.0)) return 0.0;
    if (r >= r_max()) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 52; ++i) {
        double mid = 0.5 * (lo + hi);
        (quantile(mid) > r ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

RadialLaw mccann_interpolate(const RadialLaw& mu0, const RadialLaw& mu1,
                             double t) {
    if (mu0.center.size() != mu1.center.size())
        throw InputError("mccann_interpolate: dimension mismatch");
    if (!(t >= 0.0 && t <= 1.0))
        throw InputError("mccann_interpolate: t must lie in [0, 1]");
    std::vector<double> center(mu0.center.size());
    for (std::size_t i = 0; i < center.size(); ++i)
        center[i] = (1.0 - t) * mu0.center[i] + t * mu1.center[i];
    return RadialLaw{std::move(center),
                     std::make_shared<InterpolantMeasure>(mu0.measure,
                                                          mu1.measure, t)};
}

RadialLaw mccann_interpolate(const RadialDistribution& mu0,
                             const RadialDistribution& mu1, double t) {
    if (mu0.dim() != mu1.dim())
        throw InputError("mccann_interpolate: dimension mismatch");
    return mccann_interpolate(to_law(mu0), to_law(mu1), t);
}

double numerical_density(const Measure1D& m, double r) {
    double h = m.r_max() * 1e-5;
    return (m.cdf(r + h) - m.cdf(r - h)) / (2.0 * h);
}

} // namespace radot
