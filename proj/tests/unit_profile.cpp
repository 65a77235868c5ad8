#include <doctest.h>

#include <cmath>

#include "radot/errors.hpp"
#include "radot/profile.hpp"
#include "radot/profile_spec.hpp"

using namespace radot;

TEST_CASE("sphere surface measures") {
    CHECK(sphere_surface(1) == doctest::Approx(2.0));
    CHECK(sphere_surface(2) == doctest::Approx(2.0 * M_PI));
    CHECK(sphere_surface(3) == doctest::Approx(4.0 * M_PI));
}

TEST_CASE("gaussian normalizer in d = 2 is 2 pi") {
    // Z = |S^1| * int_0^inf r e^{-r^2/2} dr = 2 pi * 1
    auto p = RadialProfile::gaussian(2);
    CHECK(normalizer(p, 1.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
    // scaling law Z(c) = c^d Z(1)
    CHECK(normalizer(p, 3.0) ==
          doctest::Approx(9.0 * 2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("bump normalizer in d = 1 is 4/3") {
    // Z = 2 * int_0^1 (1 - r^2) dr = 4/3
    auto p = RadialProfile::bump(1);
    CHECK(normalizer(p, 1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gaussian covariance is the identity at scale 1") {
    // Cov = c^2/d * (int r^{d+1} rho / int r^{d-1} rho) I = I for the
    // gaussian generator in any dimension
    for (int d : {1, 2, 3}) {
        RadialDistribution dist(std::vector<double>(d, 0.0), 1.0,
                                RadialProfile::gaussian(d));
        CHECK(covariance_scalar(dist) == doctest::Approx(1.0).epsilon(1e-11));
    }
}

TEST_CASE("gaussian radial CDF median in d = 2") {
    // F(r) = 1 - e^{-r^2/2}, so F(sqrt(2 ln 2)) = 1/2
    RadialMeasure m(RadialProfile::gaussian(2), 1.0);
    double r_half = std::sqrt(2.0 * std::log(2.0));
    CHECK(m.cdf(r_half) == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(m.quantile(0.5) == doctest::Approx(r_half).epsilon(1e-9));
}

TEST_CASE("quantile / cdf round trip across families") {
    std::vector<RadialProfile> profiles = {
        RadialProfile::gaussian(2), RadialProfile::exponential(2),
        RadialProfile::student(2, 3.0), RadialProfile::bump(2),
        RadialProfile::tabulated(2, {0.0, 0.5, 1.0, 2.0},
                                 {1.0, 0.7, 0.4, 0.0})};
    for (const auto& p : profiles) {
        RadialMeasure m(p, 1.3);
        for (double u : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
            double r = m.quantile(u);
            CHECK(m.cdf(r) == doctest::Approx(u).epsilon(1e-8));
        }
        for (double u : {0.05, 0.5, 0.95}) {
            // scale acts multiplicatively on quantiles
            RadialMeasure m1(p, 1.0);
            CHECK(m.quantile(u) ==
                  doctest::Approx(1.3 * m1.quantile(u)).epsilon(1e-9));
        }
    }
}

TEST_CASE("density normalizes against the radial measure") {
    RadialDistribution dist({0.4, -0.2}, 1.7, RadialProfile::exponential(2));
    RadialMeasure m = radial_measure(dist);
    // density along a ray times the sphere factor equals the radial density
    double r = 1.1;
    double x[2] = {dist.center[0] + r, dist.center[1]};
    double lhs = dist.density(std::span<const double>(x, 2)) *
                 sphere_surface(2) * r;
    CHECK(lhs == doctest::Approx(m.density(r)).epsilon(1e-10));
}

TEST_CASE("divergent generators are rejected") {
    // infinite mass: rho = (1+r^2)^{-1} in d = 2 has int r rho = inf
    CHECK_THROWS_AS(RadialProfile::student(2, 1.0), MathError);
    CHECK_THROWS_AS(RadialProfile::student(2, -1.0), InputError);
    // negative generator
    CHECK_THROWS_AS(RadialProfile([](double r) { return 1.0 - r; }, 2),
                    InputError);
}

TEST_CASE("tabulated profile input validation") {
    CHECK_THROWS_AS(RadialProfile::tabulated(2, {0.5, 1.0}, {1.0, 0.0}),
                    InputError);
    CHECK_THROWS_AS(RadialProfile::tabulated(2, {0.0, 1.0, 0.5},
                                             {1.0, 0.5, 0.0}),
                    InputError);
    CHECK_THROWS_AS(RadialProfile::tabulated(2, {0.0, 1.0}, {1.0, -0.1}),
                    InputError);
}

TEST_CASE("profile spec parsing and round trip") {
    auto d = parse_profile_spec(std::string(
        R"({"family":"student","params":{"p":3},"dim":2,"scale":1.5,)"
        R"("center":[0.5,-0.5]})"));
    CHECK(d.dim() == 2);
    CHECK(d.scale == doctest::Approx(1.5));
    CHECK(d.profile.family() == "student");
    auto j = profile_spec_json(d);
    auto d2 = parse_profile_spec(j);
    CHECK(d2.scale == d.scale);
    CHECK(d2.center == d.center);
    CHECK(d2.profile.family_param() == doctest::Approx(3.0));

    CHECK_THROWS_AS(parse_profile_spec(std::string("{not json")), InputError);
    CHECK_THROWS_AS(parse_profile_spec(std::string(
                        R"({"family":"zippy","params":{},"dim":2,)"
                        R"("scale":1,"center":[0,0]})")),
                    InputError);
    CHECK_THROWS_AS(parse_profile_spec(std::string(
                        R"({"family":"gaussian","params":{},"dim":2,)"
                        R"("scale":1,"center":[0,0,0]})")),
                    InputError);
}
