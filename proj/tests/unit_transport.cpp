#include <doctest.h>

#include <cmath>
#include <memory>

#include "radot/errors.hpp"
#include "radot/transport.hpp"

using namespace radot;

namespace {

std::vector<RadialDistribution> test_family() {
    std::vector<RadialDistribution> d;
    d.emplace_back(std::vector<double>{0.0, 0.0}, 1.0,
                   RadialProfile::gaussian(2));
    d.emplace_back(std::vector<double>{1.0, -0.5}, 1.5,
                   RadialProfile::exponential(2));
    d.emplace_back(std::vector<double>{-0.5, 0.5}, 1.0,
                   RadialProfile::student(2, 3.0));
    d.emplace_back(std::vector<double>{0.5, 1.0}, 2.0,
                   RadialProfile::bump(2));
    d.emplace_back(std::vector<double>{0.0, -1.0}, 1.0,
                   RadialProfile::tabulated(2, {0.0, 0.5, 1.0, 1.5, 2.0},
                                            {1.0, 0.8, 0.5, 0.2, 0.0}));
    return d;
}

} // namespace

TEST_CASE("same-family rearrangement is a dilation") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution mu1({1.0, 0.0}, 2.0, RadialProfile::gaussian(2));
    RadialMap c = radial_rearrangement(mu0, mu1);
    for (int k = 1; k <= 100; ++k) {
        double r = 3.0 * k / 100.0;
        CHECK(c(r) == doctest::Approx(2.0 * r).epsilon(1e-8));
    }
    // W2^2 = |m0-m1|^2 + (c0-c1)^2 * (second moment of the radial law)
    CHECK(w2_distance(mu0, mu1) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-8));
}

TEST_CASE("Monge map sends centers to centers") {
    RadialDistribution mu0({0.5, -1.0}, 1.0, RadialProfile::exponential(2));
    RadialDistribution mu1({-2.0, 3.0}, 0.7, RadialProfile::gaussian(2));
    MongeMap t = monge_map(mu0, mu1);
    double x[2] = {0.5, -1.0};
    auto y = t(std::span<const double>(x, 2));
    CHECK(y[0] == doctest::Approx(-2.0));
    CHECK(y[1] == doctest::Approx(3.0));
    // vectorized form agrees with pointwise evaluation
    double pts[4] = {1.5, -1.0, 0.5, 0.0};
    auto mapped = t.apply(std::span<const double>(pts, 4), 2);
    auto y0 = t(std::span<const double>(pts, 2));
    CHECK(mapped[0] == doctest::Approx(y0[0]));
    CHECK(mapped[1] == doctest::Approx(y0[1]));
}

TEST_CASE("pushforward identity and monotonicity across family pairs") {
    auto d = test_family();
    for (std::size_t a = 0; a < d.size(); ++a) {
        for (std::size_t b = 0; b < d.size(); ++b) {
            if (a == b) continue;
            RadialMap c = radial_rearrangement(d[a], d[b]);
            double prev = -1.0;
            for (int k = 1; k <= 40; ++k) {
                double r = c.source().quantile(0.0245 * k);
                double cr = c(r);
                CHECK(cr >= prev); // monotone
                prev = cr;
                // F_target(C(r)) = F_source(r)
                CHECK(c.target().cdf(cr) ==
                      doctest::Approx(c.source().cdf(r)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("W2 is a metric on test pairs") {
    auto d = test_family();
    CHECK(w2_distance(d[0], d[0]) == doctest::Approx(0.0).epsilon(1e-10));
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b) {
            double ab = w2_distance(d[a], d[b]);
            double ba = w2_distance(d[b], d[a]);
            CHECK(ab == doctest::Approx(ba).epsilon(1e-8)); // symmetry
            for (std::size_t c = 0; c < d.size(); ++c) {
                double ac = w2_distance(d[a], d[c]);
                double cb = w2_distance(d[c], d[b]);
                CHECK(ab <= ac + cb + 1e-8); // triangle
            }
        }
}

TEST_CASE("interpolant endpoints reproduce the inputs") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution mu1({2.0, 1.0}, 1.5, RadialProfile::bump(2));
    auto l0 = mccann_interpolate(mu0, mu1, 0.0);
    auto l1 = mccann_interpolate(mu0, mu1, 1.0);
    RadialMeasure m0 = radial_measure(mu0);
    RadialMeasure m1 = radial_measure(mu1);
    for (double u : {0.1, 0.5, 0.9}) {
        CHECK(l0.measure->quantile(u) ==
              doctest::Approx(m0.quantile(u)).epsilon(1e-10));
        CHECK(l1.measure->quantile(u) ==
              doctest::Approx(m1.quantile(u)).epsilon(1e-10));
    }
    CHECK(l0.center == mu0.center);
    CHECK(l1.center == mu1.center);
}

TEST_CASE("same-family midpoint has the averaged scale") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution mu1({1.0, 0.0}, 2.0, RadialProfile::gaussian(2));
    auto mid = mccann_interpolate(mu0, mu1, 0.5);
    RadialMeasure ref(RadialProfile::gaussian(2), 1.5);
    for (double u : {0.05, 0.3, 0.5, 0.8, 0.97})
        CHECK(mid.measure->quantile(u) ==
              doctest::Approx(ref.quantile(u)).epsilon(1e-9));
    CHECK(mid.center[0] == doctest::Approx(0.5));
}

TEST_CASE("geodesic constant speed on a cross-family pair") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::exponential(2));
    RadialDistribution mu1({1.0, 1.0}, 2.0, RadialProfile::bump(2));
    double w01 = w2_distance(mu0, mu1);
    for (auto [s, t] : std::vector<std::pair<double, double>>{
             {0.0, 0.5}, {0.25, 0.75}, {0.5, 1.0}}) {
        auto ls = mccann_interpolate(mu0, mu1, s);
        auto lt = mccann_interpolate(mu0, mu1, t);
        CHECK(w2_distance(ls, lt) ==
              doctest::Approx((t - s) * w01).epsilon(1e-6));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    RadialDistribution a({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution b({0.0, 0.0, 0.0}, 1.0, RadialProfile::gaussian(3));
    CHECK_THROWS_AS(w2_distance(a, b), InputError);
    CHECK_THROWS_AS(monge_map(a, b), InputError);
    MongeMap t = monge_map(a, a);
    double x[3] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(t(std::span<const double>(x, 3)), InputError);
}
