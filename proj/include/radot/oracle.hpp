#pragma once

#include <cstdint>
#include <vector>

#include "radot/profile.hpp"

namespace radot {

/// Counter-based deterministic RNG: draw k of stream `seed` is
/// splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15), so clouds are reproducible
/// from (seed, index) alone.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    /// uniform on (0, 1)
    double uniform();
    /// standard normal (Box-Muller, pair-cached)
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct PointCloud {
    std::size_t dim = 0;
    std::vector<double> points;  // row-major n x dim
    std::vector<double> weights; // simplex

    std::size_t size() const { return weights.size(); }
    const double* point(std::size_t k) const { return points.data() + k * dim; }
};

/// i.i.d. draws: radius by inverse CDF, direction uniform on the sphere via
/// a normalized gaussian vector.
PointCloud sample(const RadialDistribution& dist, std::size_t n,
                  std::uint64_t seed);

struct CouplingEntry {
    std::uint32_t i, j;
    double mass;
};

struct OtResult {
    double cost = 0.0; // sum ||x - y||^2 d gamma
    std::vector<CouplingEntry> coupling;
};

/// Exact optimal transport for squared-Euclidean cost, solved by a
/// transportation simplex. Optimality is certified internally through the
/// reduced costs of the final basis. Instance size capped at n*m <= 4e6.
OtResult discrete_ot(const PointCloud& a, const PointCloud& b);

struct W2Estimate {
    double value = 0.0;
    double sigma = 0.0; // bootstrap standard deviation (10 replicates)
};

/// Two-sample plug-in W2 estimator with a bootstrap error bar.
W2Estimate empirical_w2(const RadialDistribution& mu0,
                        const RadialDistribution& mu1, std::size_t n,
                        std::uint64_t seed);

/// Weighted average of sorted order statistics (1D quantile averaging).
PointCloud empirical_1d_barycenter(const std::vector<PointCloud>& clouds,
                                   const std::vector<double>& weights);

} // namespace radot
