#include "radot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radot/errors.hpp"
#include "radot/transport.hpp"

namespace radot {

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

PointCloud sample(const RadialDistribution& dist, std::size_t n,
                  std::uint64_t seed) {
    if (n < 1) throw InputError("sample: n must be >= 1");
    const std::size_t d = static_cast<std::size_t>(dist.dim());
    RadialMeasure measure(dist.profile, dist.scale);
    CounterRng rng(seed);

    PointCloud cloud;
    cloud.dim = d;
    cloud.points.resize(n * d);
    cloud.weights.assign(n, 1.0 / static_cast<double>(n));

    std::vector<double> dir(d);
    for (std::size_t k = 0; k < n; ++k) {
        double radius = measure.quantile(rng.uniform());
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                dir[i] = rng.normal();
                norm2 += dir[i] * dir[i];
            }
        } while (norm2 < 1e-24);
        double inv = radius / std::sqrt(norm2);
        for (std::size_t i = 0; i < d; ++i)
            cloud.points[k * d + i] = dist.center[i] + inv * dir[i];
    }
    return cloud;
}

namespace {

// Transportation simplex (MODI). Basis is a spanning tree on sources+sinks;
// potentials are recomputed by BFS each pivot, entering arcs found by a
// cyclic block search over the dense arc set.
class TransportSimplex {
public:
    TransportSimplex(const PointCloud& a, const PointCloud& b)
        : n_(a.size()), m_(b.size()) {
        cost_.resize(n_ * m_);
        double maxc = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j) {
                double c = 0.0;
                for (std::size_t t = 0; t < a.dim; ++t) {
                    double dd = a.point(i)[t] - b.point(j)[t];
                    c += dd * dd;
                }
                cost_[i * m_ + j] = c;
                maxc = std::max(maxc, c);
            }
        opt_tol_ = 1e-12 * std::max(maxc, 1.0);

        // Charnes perturbation breaks the massive degeneracy of
        // equal-weight clouds; it shifts marginals by <= n * eps.
        const double eps = 1e-14;
        supply_ = a.weights;
        demand_ = b.weights;
        for (double& s : supply_) s += eps;
        demand_.back() += eps * static_cast<double>(n_);
    }

    OtResult solve() {
        northwest_corner();
        const std::size_t v = n_ + m_;
        const std::size_t block =
            std::max<std::size_t>(64, static_cast<std::size_t>(
                                          std::sqrt(double(n_ * m_))));
        const std::size_t max_pivots = 200 * v + 100000;

        compute_potentials();
        std::size_t scan_pos = 0;
        for (std::size_t pivot = 0;; ++pivot) {
            if (pivot > max_pivots)
                throw ConvergenceError("discrete_ot: simplex pivot budget "
                                       "exhausted");

            // entering arc: best reduced cost within the first block that
            // contains a violation, scanning cyclically
            std::size_t total = n_ * m_;
            std::size_t scanned = 0;
            double best_rc = -opt_tol_;
            std::size_t best_arc = total;
            while (scanned < total) {
                std::size_t chunk = std::min(block, total - scanned);
                for (std::size_t s = 0; s < chunk; ++s) {
                    std::size_t arc = scan_pos;
                    if (++scan_pos == total) scan_pos = 0;
                    std::size_t i = arc / m_, j = arc % m_;
                    double rc = cost_[arc] - pi_[i] - pi_[n_ + j];
                    if (rc < best_rc) {
                        best_rc = rc;
                        best_arc = arc;
                    }
                }
                scanned += chunk;
                if (best_arc != total) break;
            }
            if (best_arc == total) break; // optimal
            pivot_on(best_arc / m_, n_ + best_arc % m_, best_rc);
        }
        return extract();
    }

private:
    std::size_t n_, m_;
    std::vector<double> cost_;
    std::vector<double> supply_, demand_;
    double opt_tol_ = 0.0;

    struct BasisArc {
        std::uint32_t src, dst; // node ids: sources 0..n-1, sinks n..n+m-1
        double flow;
    };
    std::vector<BasisArc> basis_;
    std::vector<std::vector<std::uint32_t>> adj_; // node -> basis indices
    std::vector<double> pi_;
    std::vector<std::int32_t> parent_node_;
    std::vector<std::int32_t> parent_arc_;
    std::vector<std::int32_t> depth_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint32_t> scratch_;

    void add_basis_arc(std::uint32_t i, std::uint32_t jnode, double flow) {
        adj_[i].push_back(static_cast<std::uint32_t>(basis_.size()));
        adj_[jnode].push_back(static_cast<std::uint32_t>(basis_.size()));
        basis_.push_back(BasisArc{i, jnode, flow});
    }

    // Row-minimum greedy start: each source fills the cheapest sinks with
    // remaining demand. Like the northwest-corner rule under a cost-driven
    // column order, the arcs form a forest; stray components (exact flow
    // ties) are reconnected with zero-flow arcs to make a spanning tree.
    void northwest_corner() {
        adj_.assign(n_ + m_, {});
        basis_.reserve(n_ + m_ - 1);
        std::vector<double> s = supply_, d = demand_;
        std::vector<std::uint32_t> avail(m_);
        for (std::size_t j = 0; j < m_; ++j)
            avail[j] = static_cast<std::uint32_t>(j);

        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = cost_.data() + i * m_;
            while (s[i] > 0.0 && !avail.empty()) {
                std::size_t best = 0;
                double best_c = row[avail[0]];
                for (std::size_t k = 1; k < avail.size(); ++k)
                    if (row[avail[k]] < best_c) {
                        best_c = row[avail[k]];
                        best = k;
                    }
                std::uint32_t j = avail[best];
                double f = std::min(s[i], d[j]);
                add_basis_arc(static_cast<std::uint32_t>(i),
                              static_cast<std::uint32_t>(n_ + j), f);
                s[i] -= f;
                d[j] -= f;
                if (d[j] <= 0.0) {
                    avail[best] = avail.back();
                    avail.pop_back();
                }
            }
        }

        // union-find over the forest, then link components with zero flow
        std::vector<std::uint32_t> root(n_ + m_);
        for (std::size_t v = 0; v < root.size(); ++v)
            root[v] = static_cast<std::uint32_t>(v);
        std::function<std::uint32_t(std::uint32_t)> find =
            [&](std::uint32_t v) {
                while (root[v] != v) {
                    root[v] = root[root[v]];
                    v = root[v];
                }
                return v;
            };
        for (const BasisArc& arc : basis_)
            root[find(arc.src)] = find(arc.dst);
        const std::uint32_t s0 = 0;
        const std::uint32_t t0 = static_cast<std::uint32_t>(n_);
        if (find(s0) != find(t0)) {
            add_basis_arc(s0, t0, 0.0);
            root[find(t0)] = find(s0);
        }
        for (std::size_t v = 1; v < n_ + m_; ++v) {
            std::uint32_t vv = static_cast<std::uint32_t>(v);
            if (vv == t0 || find(vv) == find(s0)) continue;
            // hook into the anchor of the opposite side
            if (v < n_)
                add_basis_arc(vv, t0, 0.0);
            else
                add_basis_arc(s0, vv, 0.0);
            root[find(vv)] = find(s0);
        }
    }

    void compute_potentials() {
        const std::size_t v = n_ + m_;
        pi_.assign(v, 0.0);
        parent_node_.assign(v, -1);
        parent_arc_.assign(v, -1);
        depth_.assign(v, -1);
        order_.clear();
        order_.reserve(v);
        // basis tree is connected; BFS from node 0
        depth_[0] = 0;
        order_.push_back(0);
        for (std::size_t head = 0; head < order_.size(); ++head) {
            std::uint32_t u = order_[head];
            for (std::uint32_t bi : adj_[u]) {
                const BasisArc& arc = basis_[bi];
                std::uint32_t w = (arc.src == u) ? arc.dst : arc.src;
                if (depth_[w] >= 0) continue;
                depth_[w] = depth_[u] + 1;
                parent_node_[w] = static_cast<std::int32_t>(u);
                parent_arc_[w] = static_cast<std::int32_t>(bi);
                double c = cost_[arc.src * m_ + (arc.dst - n_)];
                pi_[w] = c - pi_[u];
                order_.push_back(w);
            }
        }
    }

    void pivot_on(std::uint32_t enter_src, std::uint32_t enter_dst,
                  double enter_rc) {
        // cycle = entering arc + tree path between its endpoints
        std::vector<std::uint32_t> arcs_gain, arcs_lose;
        std::uint32_t x = enter_src, y = enter_dst;
        // climb to the common ancestor, flow orientation alternates with
        // bipartite structure: an arc loses flow when traversed from source
        // side toward the entering source, etc.
        std::vector<std::pair<std::uint32_t, bool>> path; // (basis idx, gains)
        std::uint32_t cx = x, cy = y;
        std::vector<std::pair<std::uint32_t, bool>> up_x, up_y;
        while (depth_[cx] > depth_[cy]) {
            std::uint32_t bi = static_cast<std::uint32_t>(parent_arc_[cx]);
            // moving from cx toward root; arc direction src->dst carries flow
            bool gains = (basis_[bi].dst == cx); // entering pushes into cx?
            up_x.push_back({bi, gains});
            cx = static_cast<std::uint32_t>(parent_node_[cx]);
        }
        while (depth_[cy] > depth_[cx]) {
            std::uint32_t bi = static_cast<std::uint32_t>(parent_arc_[cy]);
            bool gains = (basis_[bi].src == cy);
            up_y.push_back({bi, gains});
            cy = static_cast<std::uint32_t>(parent_node_[cy]);
        }
        while (cx != cy) {
            std::uint32_t bix = static_cast<std::uint32_t>(parent_arc_[cx]);
            up_x.push_back({bix, basis_[bix].dst == cx});
            cx = static_cast<std::uint32_t>(parent_node_[cx]);
            std::uint32_t biy = static_cast<std::uint32_t>(parent_arc_[cy]);
            up_y.push_back({biy, basis_[biy].src == cy});
            cy = static_cast<std::uint32_t>(parent_node_[cy]);
        }
        path = up_x;
        path.insert(path.end(), up_y.begin(), up_y.end());

        // orientation bookkeeping: walking the cycle from enter_src along the
        // tree path to enter_dst, arcs alternate against the entering arc.
        // The signs assigned above mark whether each arc's flow increases
        // when one unit flows enter_src -> enter_dst through the tree path.
        double theta = std::numeric_limits<double>::infinity();
        std::int32_t leave = -1;
        std::size_t leave_pos = 0;
        for (std::size_t p = 0; p < path.size(); ++p) {
            auto [bi, gains] = path[p];
            if (!gains && basis_[bi].flow < theta) {
                theta = basis_[bi].flow;
                leave = static_cast<std::int32_t>(bi);
                leave_pos = p;
            }
        }
        if (leave < 0)
            throw ConvergenceError("discrete_ot: unbounded pivot (internal "
                                   "error)");

        for (auto [bi, gains] : path)
            basis_[bi].flow += gains ? theta : -theta;

        // replace the leaving arc in place
        BasisArc& slot = basis_[static_cast<std::size_t>(leave)];
        detach(slot.src, static_cast<std::uint32_t>(leave));
        detach(slot.dst, static_cast<std::uint32_t>(leave));
        slot = BasisArc{enter_src, enter_dst, theta};
        adj_[enter_src].push_back(static_cast<std::uint32_t>(leave));
        adj_[enter_dst].push_back(static_cast<std::uint32_t>(leave));

        // The cut of the leaving arc separates one entering endpoint from
        // the root; only that side's potentials shift, by the entering
        // reduced cost. Rebuild parent/depth there by a local BFS.
        std::uint32_t r1 = leave_pos < up_x.size() ? enter_src : enter_dst;
        std::uint32_t r0 = r1 == enter_src ? enter_dst : enter_src;
        parent_node_[r1] = static_cast<std::int32_t>(r0);
        parent_arc_[r1] = leave;
        depth_[r1] = depth_[r0] + 1;
        double shift_src = (r1 < n_) ? enter_rc : -enter_rc;
        pi_[r1] += (r1 < n_) ? shift_src : -shift_src;
        scratch_.clear();
        scratch_.push_back(r1);
        for (std::size_t head = 0; head < scratch_.size(); ++head) {
            std::uint32_t u = scratch_[head];
            for (std::uint32_t bi : adj_[u]) {
                if (static_cast<std::int32_t>(bi) == parent_arc_[u]) continue;
                const BasisArc& arc = basis_[bi];
                std::uint32_t w = (arc.src == u) ? arc.dst : arc.src;
                parent_node_[w] = static_cast<std::int32_t>(u);
                parent_arc_[w] = static_cast<std::int32_t>(bi);
                depth_[w] = depth_[u] + 1;
                pi_[w] += (w < n_) ? shift_src : -shift_src;
                scratch_.push_back(w);
            }
        }
    }

    void detach(std::uint32_t node, std::uint32_t bi) {
        auto& lst = adj_[node];
        lst.erase(std::find(lst.begin(), lst.end(), bi));
    }

    OtResult extract() {
        OtResult res;
        res.coupling.reserve(basis_.size());
        for (const BasisArc& arc : basis_) {
            if (arc.flow <= 0.0) continue;
            std::uint32_t i = arc.src;
            std::uint32_t j = arc.dst - static_cast<std::uint32_t>(n_);
            res.cost += arc.flow * cost_[i * m_ + j];
            res.coupling.push_back(CouplingEntry{i, j, arc.flow});
        }
        return res;
    }
};

} // namespace

OtResult discrete_ot(const PointCloud& a, const PointCloud& b) {
    if (a.dim != b.dim) throw InputError("discrete_ot: dimension mismatch");
    if (a.size() == 0 || b.size() == 0)
        throw InputError("discrete_ot: empty cloud");
    if (static_cast<double>(a.size()) * static_cast<double>(b.size()) >
        4.0e6)
        throw InputError("discrete_ot: instance exceeds the 4e6 arc cap; "
                         "subsample the clouds");
    return TransportSimplex(a, b).solve();
}

namespace {

PointCloud bootstrap_resample(const PointCloud& cloud, CounterRng& rng) {
    std::size_t n = cloud.size();
    std::vector<std::uint32_t> counts(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        auto idx = static_cast<std::size_t>(rng.uniform() *
                                            static_cast<double>(n));
        if (idx >= n) idx = n - 1;
        ++counts[idx];
    }
    PointCloud out;
    out.dim = cloud.dim;
    for (std::size_t k = 0; k < n; ++k) {
        if (counts[k] == 0) continue;
        out.weights.push_back(static_cast<double>(counts[k]) /
                              static_cast<double>(n));
        const double* p = cloud.point(k);
        out.points.insert(out.points.end(), p, p + cloud.dim);
    }
    return out;
}

} // namespace

W2Estimate empirical_w2(const RadialDistribution& mu0,
                        const RadialDistribution& mu1, std::size_t n,
                        std::uint64_t seed) {
    if (mu0.dim() != mu1.dim())
        throw InputError("empirical_w2: dimension mismatch");
    PointCloud a = sample(mu0, n, seed);
    PointCloud b = sample(mu1, n, seed ^ 0xD1B54A32D192ED03ULL);

    W2Estimate est;
    est.value = std::sqrt(discrete_ot(a, b).cost);

    const int replicates = 10;
    CounterRng rng(seed ^ 0x8CB92BA72F3D8DD7ULL);
    std::vector<double> vals(replicates);
    for (int k = 0; k < replicates; ++k) {
        PointCloud ak = bootstrap_resample(a, rng);
        PointCloud bk = bootstrap_resample(b, rng);
        vals[k] = std::sqrt(discrete_ot(ak, bk).cost);
    }
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / replicates;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    est.sigma = std::sqrt(var / (replicates - 1));
    return est;
}

PointCloud empirical_1d_barycenter(const std::vector<PointCloud>& clouds,
                                   const std::vector<double>& weights) {
    if (clouds.empty())
        throw InputError("empirical_1d_barycenter: no input clouds");
    if (weights.size() != clouds.size())
        throw InputError("empirical_1d_barycenter: weight count mismatch");
    std::size_t n = clouds[0].size();
    for (const auto& c : clouds) {
        if (c.dim != 1)
            throw InputError("empirical_1d_barycenter: clouds must be 1D");
        if (c.size() != n)
            throw InputError("empirical_1d_barycenter: clouds must have "
                             "equal sample counts");
    }

    std::vector<std::vector<double>> sorted(clouds.size());
    for (std::size_t j = 0; j < clouds.size(); ++j) {
        sorted[j] = clouds[j].points;
        std::sort(sorted[j].begin(), sorted[j].end());
    }

    PointCloud out;
    out.dim = 1;
    out.points.resize(n);
    out.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        double v = 0.0;
        for (std::size_t j = 0; j < clouds.size(); ++j)
            v += weights[j] * sorted[j][k];
        out.points[k] = v;
    }
    return out;
}

} // namespace radot
