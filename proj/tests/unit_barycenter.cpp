#include <doctest.h>

#include <cmath>
#include <memory>

#include "radot/barycenter.hpp"
#include "radot/errors.hpp"
#include "radot/transport.hpp"

using namespace radot;

TEST_CASE("graded u-grid spans [0,1] and clusters at the ends") {
    auto u = graded_ugrid(512);
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 1.0);
    CHECK(std::is_sorted(u.begin(), u.end()));
    CHECK(u[1] - u[0] < (u[256] - u[255]) / 100.0);
}

TEST_CASE("single-input barycenter is the identity") {
    RadialDistribution mu({1.0, 2.0}, 1.3, RadialProfile::exponential(2));
    auto res = radial_barycenter({mu}, {1.0});
    RadialMeasure m = radial_measure(mu);
    CHECK(res.center[0] == doctest::Approx(1.0));
    CHECK(res.center[1] == doctest::Approx(2.0));
    // compare at grid nodes: between nodes the stored quantile is linear
    const auto& u = res.measure.quantile->ugrid();
    const auto& q = res.measure.quantile->values();
    for (std::size_t k : {u.size() / 10, u.size() / 2, 9 * u.size() / 10})
        CHECK(q[k] == doctest::Approx(m.quantile(u[k])).epsilon(1e-10));
    CHECK(res.residual <= tol::residual);
    CHECK(res.measure.atoms.empty());
}

TEST_CASE("same-family barycenter reproduces the averaged scale") {
    // Example: scales 1, 2, 4 with weights .2/.3/.5 -> c* = 2.8
    std::vector<RadialDistribution> d;
    d.emplace_back(std::vector<double>{0.0, 0.0}, 1.0,
                   RadialProfile::gaussian(2));
    d.emplace_back(std::vector<double>{1.0, 0.0}, 2.0,
                   RadialProfile::gaussian(2));
    d.emplace_back(std::vector<double>{0.0, -2.0}, 4.0,
                   RadialProfile::gaussian(2));
    std::vector<double> w{0.2, 0.3, 0.5};
    auto res = radial_barycenter(d, w);

    CHECK(res.center[0] == doctest::Approx(0.3));  // exact affine average
    CHECK(res.center[1] == doctest::Approx(-1.0));
    RadialMeasure ref(RadialProfile::gaussian(2), 2.8);
    const auto& u = res.measure.quantile->ugrid();
    const auto& q = res.measure.quantile->values();
    for (std::size_t k = u.size() / 50; k + u.size() / 50 < u.size();
         k += u.size() / 8)
        CHECK(q[k] == doctest::Approx(ref.quantile(u[k])).epsilon(1e-8));
    CHECK(res.residual <= tol::residual);
}

TEST_CASE("mixed-family barycenter carries a valid certificate") {
    std::vector<RadialDistribution> d;
    d.emplace_back(std::vector<double>{0.0, 0.0}, 1.0,
                   RadialProfile::gaussian(2));
    d.emplace_back(std::vector<double>{1.0, -0.5}, 1.5,
                   RadialProfile::exponential(2));
    d.emplace_back(std::vector<double>{0.5, 1.0}, 2.0,
                   RadialProfile::bump(2));
    std::vector<double> w{0.3, 0.3, 0.4};
    auto res = radial_barycenter(d, w);
    CHECK(res.residual <= tol::residual);

    // the barycenter beats nearby perturbed candidates in the functional
    std::vector<RadialLaw> laws;
    for (const auto& x : d) laws.push_back(to_law(x));
    double best = barycenter_functional(res.law(), laws, w);
    for (double bump : {-0.05, 0.03, 0.08}) {
        auto q = res.measure.quantile->values();
        for (double& v : q) v *= 1.0 + bump;
        auto perturbed = std::make_shared<PiecewiseQuantile>(
            res.measure.quantile->ugrid(), q);
        RadialLaw cand{res.center, perturbed};
        CHECK(best <= barycenter_functional(cand, laws, w) + 1e-12);
    }
    for (double shift : {-0.1, 0.1}) {
        RadialLaw cand{{res.center[0] + shift, res.center[1]},
                       res.measure.quantile};
        CHECK(best <= barycenter_functional(cand, laws, w) + 1e-12);
    }
}

TEST_CASE("two-point barycenter equals the McCann interpolant") {
    RadialDistribution mu0({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    RadialDistribution mu1({2.0, -1.0}, 1.8, RadialProfile::student(2, 3.0));
    for (double t : {0.25, 0.5, 0.75}) {
        auto res = radial_barycenter({mu0, mu1}, {1.0 - t, t});
        auto mc = mccann_interpolate(mu0, mu1, t);
        CHECK(res.center[0] == doctest::Approx(mc.center[0]));
        CHECK(res.center[1] == doctest::Approx(mc.center[1]));
        double rtop = res.measure.quantile->r_max();
        double sup = 0.0;
        for (int k = 1; k < 400; ++k) {
            double r = rtop * k / 400.0;
            sup = std::max(sup, std::fabs(res.measure.quantile->cdf(r) -
                                          mc.measure->cdf(r)));
        }
        CHECK(sup <= 1e-6);
    }
}

TEST_CASE("atom detection on a constructed flat quantile") {
    // quantile flat on u in [0.4, 0.6] <=> an atom of mass 0.2 at r = 1
    std::vector<double> u, q;
    for (int k = 0; k <= 1000; ++k) {
        double uu = k / 1000.0;
        u.push_back(uu);
        if (uu < 0.4)
            q.push_back(uu / 0.4);
        else if (uu <= 0.6)
            q.push_back(1.0);
        else
            q.push_back(1.0 + (uu - 0.6) / 0.4);
    }
    PiecewiseQuantile pq(u, q);
    auto atoms = detect_atoms(pq);
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].radius == doctest::Approx(1.0));
    CHECK(atoms[0].mass == doctest::Approx(0.2).epsilon(1e-6));
    // CDF jumps across the atom
    CHECK(pq.cdf(1.0 - 1e-9) == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(pq.cdf(1.0) == doctest::Approx(0.6).epsilon(1e-6));

    // a strictly increasing quantile has no atoms
    RadialDistribution g({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    auto res = radial_barycenter({g}, {1.0});
    CHECK(detect_atoms(res.measure).empty());
}

TEST_CASE("weight validation") {
    RadialDistribution g({0.0, 0.0}, 1.0, RadialProfile::gaussian(2));
    CHECK_THROWS_AS(radial_barycenter({g, g}, {0.7, 0.7}), InputError);
    CHECK_THROWS_AS(radial_barycenter({g, g}, {1.5, -0.5}), InputError);
    CHECK_THROWS_AS(radial_barycenter({g, g}, {1.0}), InputError);
    CHECK_THROWS_AS(radial_barycenter(std::vector<RadialDistribution>{},
                                      std::vector<double>{}),
                    InputError);
}
