#include "radot/profile.hpp"

#include <algorithm>
#include <cmath>

#include "radot/errors.hpp"
#include "radot/quadrature.hpp"

namespace radot {

double sphere_surface(int dim) {
    if (dim < 1) throw InputError("sphere_surface: dim must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
}

namespace {

struct TailRecord {
    std::vector<double> radii; // doubling endpoints
    std::vector<double> cum;   // cumulative integral at radii
    double total = 0.0;
};

// Integrate g over [0, inf) by doubling the upper limit until increments are
// negligible. Throws MathError if no convergence within the radius cap.
TailRecord converge_integral(const std::function<double(double)>& g,
                             double support_end,
                             std::span<const double> breakpoints,
                             const char* what) {
    TailRecord rec;
    rec.radii.push_back(0.0);
    rec.cum.push_back(0.0);

    if (std::isfinite(support_end)) {
        double v = integrate(g, 0.0, support_end, 1e-13, 0.0, breakpoints);
        rec.radii.push_back(support_end);
        rec.cum.push_back(v);
        rec.total = v;
        return rec;
    }

    constexpr double radius_cap = 1e12;
    double upper = 1.0;
    double total = integrate(g, 0.0, upper, 1e-13, 0.0, breakpoints);
    rec.radii.push_back(upper);
    rec.cum.push_back(total);
    while (true) {
        double inc =
            integrate_adaptive(g, upper, 2.0 * upper, 1e-13,
                               1e-17 * std::max(total, 1e-300))
                .value;
        upper *= 2.0;
        total += inc;
        rec.radii.push_back(upper);
        rec.cum.push_back(total);
        if (total > 0.0 && inc <= 1e-15 * total) break;
        if (upper > radius_cap)
            throw MathError(std::string(what) +
                            ": integral does not converge (divergent or "
                            "extremely heavy-tailed generator)");
    }
    rec.total = total;
    return rec;
}

// Smallest radius whose tail mass is <= eps * total, resolved by bisection
// against the doubling record.
double truncation_radius(const std::function<double(double)>& g,
                         const TailRecord& rec, double eps) {
    double target = (1.0 - eps) * rec.total;
    std::size_t k = 1;
    while (k < rec.cum.size() && rec.cum[k] < target) ++k;
    if (k >= rec.cum.size()) return rec.radii.back();
    double lo = rec.radii[k - 1], hi = rec.radii[k];
    double cum_lo = rec.cum[k - 1];
    for (int it = 0; it < 60 && hi - lo > 1e-12 * hi + 1e-300; ++it) {
        double mid = 0.5 * (lo + hi);
        double c = cum_lo + integrate_adaptive(g, lo, mid, 1e-12,
                                               1e-16 * rec.total)
                                .value;
        if (c < target) {
            lo = mid;
            cum_lo = c;
        } else {
            hi = mid;
        }
    }
    return hi;
}

} // namespace

struct RadialProfile::Impl {
    Generator generator;
    int dim = 1;
    std::vector<double> breakpoints;
    double support_end = std::numeric_limits<double>::infinity();
    std::string family;
    double tail_radius = 0.0;
    double mass_integral = 0.0;
    double second_moment_ratio = 0.0;
    double family_param = std::numeric_limits<double>::quiet_NaN();
};

RadialProfile::RadialProfile(Generator generator, int dim,
                             std::vector<double> breakpoints,
                             double support_end, std::string family) {
    if (dim < 1) throw InputError("RadialProfile: dim must be >= 1");
    if (!generator) throw InputError("RadialProfile: empty generator");

    auto impl = std::make_shared<Impl>();
    impl->generator = std::move(generator);
    impl->dim = dim;
    impl->breakpoints = std::move(breakpoints);
    std::sort(impl->breakpoints.begin(), impl->breakpoints.end());
    impl->support_end = support_end;
    impl->family = std::move(family);

    const auto& g = impl->generator;
    // nonnegativity spot check
    double probe_end = std::isfinite(support_end) ? support_end : 64.0;
    for (int i = 0; i <= 64; ++i) {
        double r = probe_end * i / 64.0;
        if (g(r) < 0.0)
            throw InputError("RadialProfile: generator is negative at r = " +
                             std::to_string(r));
    }

    auto mass_density = [&g, dim](double r) {
        return std::pow(r, dim - 1) * g(r);
    };
    auto moment_density = [&g, dim](double r) {
        return std::pow(r, dim + 1) * g(r);
    };

    TailRecord mass = converge_integral(mass_density, support_end,
                                        impl->breakpoints, "normalizer");
    if (!(mass.total > 0.0))
        throw MathError("RadialProfile: generator carries no mass");
    TailRecord moment = converge_integral(moment_density, support_end,
                                          impl->breakpoints, "second moment");

    impl->mass_integral = mass.total;
    impl->second_moment_ratio = moment.total / mass.total;
    impl->tail_radius = std::isfinite(support_end)
                            ? support_end
                            : truncation_radius(mass_density, mass,
                                                tol::tail_eps);
    impl_ = std::move(impl);
}

RadialProfile RadialProfile::gaussian(int dim) {
    return RadialProfile([](double r) { return std::exp(-0.5 * r * r); }, dim,
                         {}, std::numeric_limits<double>::infinity(),
                         "gaussian");
}

RadialProfile RadialProfile::exponential(int dim) {
    return RadialProfile([](double r) { return std::exp(-r); }, dim, {},
                         std::numeric_limits<double>::infinity(),
                         "exponential");
}

RadialProfile RadialProfile::student(int dim, double p) {
    if (!(p > 0.0)) throw InputError("student profile: p must be positive");
    RadialProfile prof(
        [p](double r) { return std::pow(1.0 + r * r, -p); }, dim, {},
        std::numeric_limits<double>::infinity(), "student");
    auto patched = std::make_shared<Impl>(*prof.impl_);
    patched->family_param = p;
    prof.impl_ = std::move(patched);
    return prof;
}

RadialProfile RadialProfile::bump(int dim) {
    return RadialProfile(
        [](double r) { return std::max(1.0 - r * r, 0.0); }, dim, {1.0}, 1.0,
        "bump");
}

RadialProfile RadialProfile::tabulated(int dim, std::vector<double> r,
                                       std::vector<double> rho) {
    if (r.size() != rho.size() || r.size() < 2)
        throw InputError("tabulated profile: need matching r/rho arrays with "
                         ">= 2 samples");
    if (r.front() != 0.0)
        throw InputError("tabulated profile: r must start at 0");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!(r[i] < r[i + 1]))
            throw InputError("tabulated profile: r must be strictly "
                             "increasing");
    for (double v : rho)
        if (v < 0.0)
            throw InputError("tabulated profile: rho must be nonnegative");

    double end = r.back();
    std::vector<double> bp = r;
    auto rr = std::make_shared<std::vector<double>>(std::move(r));
    auto vv = std::make_shared<std::vector<double>>(std::move(rho));
    auto gen = [rr, vv](double x) {
        if (x <= rr->front()) return vv->front();
        if (x >= rr->back()) return 0.0;
        auto it = std::upper_bound(rr->begin(), rr->end(), x);
        std::size_t k = static_cast<std::size_t>(it - rr->begin()) - 1;
        double w = (x - (*rr)[k]) / ((*rr)[k + 1] - (*rr)[k]);
        return (1.0 - w) * (*vv)[k] + w * (*vv)[k + 1];
    };
    return RadialProfile(std::move(gen), dim, std::move(bp), end, "table");
}

double RadialProfile::operator()(double r) const { return impl_->generator(r); }
int RadialProfile::dim() const { return impl_->dim; }
const std::string& RadialProfile::family() const { return impl_->family; }
double RadialProfile::tail_radius() const { return impl_->tail_radius; }
double RadialProfile::mass_integral() const { return impl_->mass_integral; }
double RadialProfile::second_moment_ratio() const {
    return impl_->second_moment_ratio;
}
const std::vector<double>& RadialProfile::breakpoints() const {
    return impl_->breakpoints;
}
double RadialProfile::support_end() const { return impl_->support_end; }
double RadialProfile::family_param() const { return impl_->family_param; }

RadialDistribution::RadialDistribution(std::vector<double> center_,
                                       double scale_, RadialProfile profile_)
    : center(std::move(center_)), scale(scale_), profile(std::move(profile_)) {
    if (!(scale > 0.0))
        throw InputError("RadialDistribution: scale must be positive");
    if (static_cast<int>(center.size()) != profile.dim())
        throw InputError("RadialDistribution: center length " +
                         std::to_string(center.size()) +
                         " does not match dim " +
                         std::to_string(profile.dim()));
}

double RadialDistribution::density(std::span<const double> x) const {
    if (x.size() != center.size())
        throw InputError("density: point dimension mismatch");
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - center[i];
        r2 += d * d;
    }
    double z = normalizer(profile, scale);
    return profile(std::sqrt(r2) / scale) / z;
}

RadialMeasure::RadialMeasure(RadialProfile profile, double scale)
    : profile_(std::move(profile)), scale_(scale) {
    if (!(scale_ > 0.0))
        throw InputError("RadialMeasure: scale must be positive");
    mass_ = profile_.mass_integral();
    t_max_ = profile_.tail_radius();

    // Cached cumulative grid in the scale-1 variable; breakpoints included so
    // quadrature never straddles a generator kink.
    const int n_uniform = 512;
    nodes_.reserve(n_uniform + profile_.breakpoints().size() + 1);
    for (int i = 0; i <= n_uniform; ++i)
        nodes_.push_back(t_max_ * i / n_uniform);
    for (double b : profile_.breakpoints())
        if (b > 0.0 && b < t_max_) nodes_.push_back(b);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

    const int d = profile_.dim();
    auto g = [this, d](double t) {
        return std::pow(t, d - 1) * profile_(t);
    };
    cum_.resize(nodes_.size());
    cum_[0] = 0.0;
    for (std::size_t k = 1; k < nodes_.size(); ++k)
        cum_[k] = cum_[k - 1] +
                  integrate_adaptive(g, nodes_[k - 1], nodes_[k], 1e-13,
                                     1e-17 * mass_)
                      .value;
}

double RadialMeasure::r_max() const { return scale_ * t_max_; }

double RadialMeasure::cdf_t(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= t_max_) return std::min(cum_.back() / mass_, 1.0);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const int d = profile_.dim();
    auto g = [this, d](double s) { return std::pow(s, d - 1) * profile_(s); };
    double c = cum_[k] + integrate_adaptive(g, nodes_[k], t, 1e-13,
                                            1e-17 * mass_)
                             .value;
    return std::min(c / mass_, 1.0);
}

double RadialMeasure::cdf(double r) const { return cdf_t(r / scale_); }

double RadialMeasure::density(double r) const {
    double t = r / scale_;
    if (t < 0.0 || t > t_max_) return 0.0;
    const int d = profile_.dim();
    return std::pow(t, d - 1) * profile_(t) / (mass_ * scale_);
}

double RadialMeasure::quantile(double u) const {
    if (u < 0.0 || u > 1.0)
        throw InputError("quantile: u must lie in [0, 1]");
    double top = cum_.back() / mass_;
    if (u >= top) return r_max();

    // bracket on the cached grid
    double target = u * mass_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t k = static_cast<std::size_t>(it - cum_.begin());
    if (u == 0.0) {
        // left edge of the support: first node with positive mass
        std::size_t j = 0;
        while (j + 1 < cum_.size() && cum_[j + 1] <= 0.0) ++j;
        double lo = nodes_[j], hi = nodes_[j + 1];
        for (int i = 0; i < 60 && hi - lo > tol::quantile * t_max_; ++i) {
            double mid = 0.5 * (lo + hi);
            (cdf_t(mid) > 0.0 ? hi : lo) = mid;
        }
        return scale_ * hi;
    }
    if (k == 0) k = 1;
    if (k >= nodes_.size()) k = nodes_.size() - 1;
    double lo = nodes_[k - 1], hi = nodes_[k];

    const double abs_tol = tol::quantile * t_max_;
    // bisection to the leftmost crossing, then a safeguarded Newton polish
    for (int i = 0; i < 30 && hi - lo > abs_tol; ++i) {
        double mid = 0.5 * (lo + hi);
        (cdf_t(mid) >= u ? hi : lo) = mid;
    }
    double t = 0.5 * (lo + hi);
    const int d = profile_.dim();
    for (int i = 0; i < 8; ++i) {
        double f = cdf_t(t) - u;
        double fp = std::pow(t, d - 1) * profile_(t) / mass_;
        if (!(fp > 1e-300)) break;
        double step = f / fp;
        double next = t - step;
        if (next <= lo || next >= hi) break;
        t = next;
        if (std::fabs(step) < 1e-3 * abs_tol) break;
    }
    return scale_ * t;
}

double normalizer(const RadialProfile& profile, double scale) {
    if (!(scale > 0.0)) throw InputError("normalizer: scale must be positive");
    return std::pow(scale, profile.dim()) * sphere_surface(profile.dim()) *
           profile.mass_integral();
}

double covariance_scalar(const RadialDistribution& dist) {
    return dist.scale * dist.scale / dist.dim() *
           dist.profile.second_moment_ratio();
}

RadialMeasure radial_measure(const RadialDistribution& dist) {
    return RadialMeasure(dist.profile, dist.scale);
}

std::vector<double> mean(const RadialDistribution& dist) {
    return dist.center;
}

} // namespace radot
