#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "radot/errors.hpp"
#include "radot/oracle.hpp"
#include "radot/transport.hpp"

using namespace radot;

namespace {

PointCloud make_cloud(std::vector<std::vector<double>> pts,
                      std::vector<double> w = {}) {
    PointCloud c;
    c.dim = pts[0].size();
    for (auto& p : pts)
        c.points.insert(c.points.end(), p.begin(), p.end());
    if (w.empty()) w.assign(pts.size(), 1.0 / pts.size());
    c.weights = std::move(w);
    return c;
}

double brute_force_assignment(const PointCloud& a, const PointCloud& b) {
    std::size_t n = a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < a.dim; ++t) {
                double d = a.point(i)[t] - b.point(perm[i])[t];
                cost += d * d;
            }
        best = std::min(best, cost / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

TEST_CASE("rng streams are deterministic and counter-based") {
    CounterRng r1(42), r2(42), r3(43);
    for (int k = 0; k < 16; ++k) {
        double u = r1.uniform();
        CHECK(u == r2.uniform());
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(r1.uniform() != r3.uniform());
    // normals have a sane spread
    CounterRng r(7);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        double z = r.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::fabs(s / n) < 0.03);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("simplex equals brute force on assignment instances") {
    CounterRng rng(1234);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<std::vector<double>> pa, pb;
        for (int k = 0; k < 6; ++k) {
            pa.push_back({rng.normal(), rng.normal()});
            pb.push_back({rng.normal() + 1.0, rng.normal() - 0.5});
        }
        PointCloud a = make_cloud(pa), b = make_cloud(pb);
        OtResult r = discrete_ot(a, b);
        CHECK(r.cost == doctest::Approx(brute_force_assignment(a, b))
                            .epsilon(1e-10));
    }
}

TEST_CASE("coupling marginals match the inputs") {
    PointCloud a = make_cloud({{0.0}, {1.0}, {3.0}}, {0.5, 0.2, 0.3});
    PointCloud b = make_cloud({{-1.0}, {2.0}}, {0.4, 0.6});
    OtResult r = discrete_ot(a, b);
    std::vector<double> ma(a.size(), 0.0), mb(b.size(), 0.0);
    for (const auto& e : r.coupling) {
        ma[e.i] += e.mass;
        mb[e.j] += e.mass;
        CHECK(e.mass > 0.0);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(ma[i] == doctest::Approx(a.weights[i]).epsilon(1e-10));
    for (std::size_t j = 0; j < b.size(); ++j)
        CHECK(mb[j] == doctest::Approx(b.weights[j]).epsilon(1e-10));
}

TEST_CASE("1D optimal cost equals the sorted matching") {
    CounterRng rng(99);
    const int n = 200;
    std::vector<std::vector<double>> pa, pb;
    for (int k = 0; k < n; ++k) {
        pa.push_back({rng.normal()});
        pb.push_back({2.0 * rng.normal() + 1.0});
    }
    PointCloud a = make_cloud(pa), b = make_cloud(pb);
    OtResult r = discrete_ot(a, b);

    std::vector<double> xa, xb;
    for (int k = 0; k < n; ++k) {
        xa.push_back(pa[k][0]);
        xb.push_back(pb[k][0]);
    }
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    double sorted_cost = 0.0;
    for (int k = 0; k < n; ++k)
        sorted_cost += (xa[k] - xb[k]) * (xa[k] - xb[k]) / n;
    CHECK(r.cost == doctest::Approx(sorted_cost).epsilon(1e-10));
}

TEST_CASE("instance size cap and input validation") {
    PointCloud a = make_cloud({{0.0}, {1.0}});
    PointCloud b = make_cloud({{0.0, 0.0}});
    CHECK_THROWS_AS(discrete_ot(a, b), InputError); // dim mismatch
    PointCloud big;
    big.dim = 1;
    big.points.assign(2100, 0.0);
    big.weights.assign(2100, 1.0 / 2100);
    CHECK_THROWS_AS(discrete_ot(big, big), InputError); // 2100^2 > 4e6
}

TEST_CASE("sampled radii pass a KS test against the radial CDF") {
    for (auto profile : {RadialProfile::gaussian(2),
                         RadialProfile::exponential(2),
                         RadialProfile::bump(2)}) {
        RadialDistribution dist({0.7, -0.3}, 1.4, profile);
        RadialMeasure m = radial_measure(dist);
        const std::size_t n = 2000;
        PointCloud cloud = sample(dist, n, 2024);
        std::vector<double> radii(n);
        for (std::size_t k = 0; k < n; ++k) {
            double dx = cloud.point(k)[0] - 0.7;
            double dy = cloud.point(k)[1] + 0.3;
            radii[k] = std::hypot(dx, dy);
        }
        std::sort(radii.begin(), radii.end());
        double ks = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double f = m.cdf(radii[k]);
            ks = std::max(ks, std::fabs(f - (k + 1.0) / n));
            ks = std::max(ks, std::fabs(f - k * 1.0 / n));
        }
        // 1.95 / sqrt(n) is the ~0.001 critical value
        CHECK(ks < 1.95 / std::sqrt(double(n)));
    }
}

TEST_CASE("sampled directions are isotropic") {
    RadialDistribution dist({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    const std::size_t n = 4000;
    PointCloud cloud = sample(dist, n, 5);
    double mx = 0.0, my = 0.0, quad = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double x = cloud.point(k)[0], y = cloud.point(k)[1];
        double r = std::hypot(x, y);
        mx += x / r;
        my += y / r;
        quad += (x * x - y * y) / (r * r);
    }
    CHECK(std::fabs(mx / n) < 0.05);
    CHECK(std::fabs(my / n) < 0.05);
    CHECK(std::fabs(quad / n) < 0.05);
}

TEST_CASE("empirical W2 brackets a closed form") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution mu1({1.0, 0.0}, 2.0, RadialProfile::gaussian(2));
    auto est = empirical_w2(mu0, mu1, 800, 11);
    CHECK(est.sigma > 0.0);
    CHECK(std::fabs(est.value - std::sqrt(3.0)) <= 2.0 * est.sigma);
}

TEST_CASE("empirical 1D barycenter averages order statistics") {
    PointCloud a = make_cloud({{3.0}, {1.0}, {2.0}});
    PointCloud b = make_cloud({{10.0}, {30.0}, {20.0}});
    PointCloud bary = empirical_1d_barycenter({a, b}, {0.5, 0.5});
    CHECK(bary.points[0] == doctest::Approx(5.5));
    CHECK(bary.points[1] == doctest::Approx(11.0));
    CHECK(bary.points[2] == doctest::Approx(16.5));
    PointCloud c = make_cloud({{0.0}, {1.0}});
    CHECK_THROWS_AS(empirical_1d_barycenter({a, c}, {0.5, 0.5}), InputError);
}
