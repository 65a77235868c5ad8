#include "radot/barycenter.hpp"

#include <algorithm>
#include <cmath>

#include "radot/errors.hpp"

namespace radot {

PiecewiseQuantile::PiecewiseQuantile(std::vector<double> u,
                                     std::vector<double> q)
    : u_(std::move(u)), q_(std::move(q)) {
    if (u_.size() != q_.size() || u_.size() < 2)
        throw InputError("PiecewiseQuantile: need matching grids, >= 2 nodes");
    if (u_.front() != 0.0 || u_.back() != 1.0)
        throw InputError("PiecewiseQuantile: u-grid must span [0, 1]");
    for (std::size_t k = 0; k + 1 < u_.size(); ++k) {
        if (!(u_[k] < u_[k + 1]))
            throw InputError("PiecewiseQuantile: u-grid must be increasing");
        if (q_[k + 1] < q_[k])
            throw InputError("PiecewiseQuantile: quantile must be "
                             "nondecreasing");
    }
}

double PiecewiseQuantile::quantile(double u) const {
    if (u <= 0.0) return q_.front();
    if (u >= 1.0) return q_.back();
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - u_.begin()) - 1;
    double w = (u - u_[k]) / (u_[k + 1] - u_[k]);
    return (1.0 - w) * q_[k] + w * q_[k + 1];
}

double PiecewiseQuantile::cdf(double r) const {
    if (r < q_.front()) return 0.0;
    if (r >= q_.back()) return 1.0;
    // right-continuous inverse: the largest u with Q(u) <= r
    auto it = std::upper_bound(q_.begin(), q_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - q_.begin()); // q_[k] > r
    // walk back over a flat run so jumps map to their full u-interval
    std::size_t j = k - 1;
    if (q_[k] == q_[j]) return u_[k];
    double w = (r - q_[j]) / (q_[k] - q_[j]);
    return u_[j] + w * (u_[k] - u_[j]);
}

double PiecewiseQuantile::r_max() const { return q_.back(); }

double GeneralizedRadialMeasure::atom_mass() const {
    double m = 0.0;
    for (const Atom& a : atoms) m += a.mass;
    return m;
}

std::vector<double> graded_ugrid(int n) {
    if (n < 8) throw InputError("graded_ugrid: need at least 8 points");
    std::vector<double> u(n);
    for (int k = 0; k < n; ++k)
        u[k] = 0.5 * (1.0 - std::cos(M_PI * k / (n - 1)));
    u.front() = 0.0;
    u.back() = 1.0;
    return u;
}

namespace {

void check_weights(const std::vector<double>& weights, std::size_t n) {
    if (weights.size() != n)
        throw InputError("barycenter: weight count does not match input "
                         "count");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InputError("barycenter: negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw InputError("barycenter: weights must sum to 1");
}

} // namespace

std::vector<Atom> detect_atoms(const PiecewiseQuantile& q) {
    const auto& u = q.ugrid();
    const auto& v = q.values();
    const double flat_tol = 1e-8 * std::max(q.r_max(), 1e-300);

    std::vector<Atom> atoms;
    std::size_t k = 0;
    while (k + 1 < v.size()) {
        std::size_t j = k;
        while (j + 1 < v.size() && v[j + 1] - v[k] <= flat_tol) ++j;
        if (j > k) {
            double len = u[j] - u[k];
            if (len >= tol::atom_eps)
                atoms.push_back(Atom{v[k], len});
        }
        k = std::max(j, k + 1);
    }
    return atoms;
}

std::vector<Atom> detect_atoms(const GeneralizedRadialMeasure& m) {
    return detect_atoms(*m.quantile);
}

BarycenterResult radial_barycenter(const std::vector<RadialLaw>& laws,
                                   const std::vector<double>& weights,
                                   int grid_points) {
    if (laws.empty()) throw InputError("barycenter: no input distributions");
    check_weights(weights, laws.size());
    const int d = laws[0].dim();
    for (const auto& law : laws)
        if (law.dim() != d)
            throw InputError("barycenter: dimension mismatch between inputs");

    std::vector<double> center(d, 0.0);
    for (std::size_t j = 0; j < laws.size(); ++j)
        for (int i = 0; i < d; ++i)
            center[i] += weights[j] * laws[j].center[i];

    std::vector<double> u = graded_ugrid(grid_points);
    std::vector<double> q(u.size(), 0.0);
    for (std::size_t j = 0; j < laws.size(); ++j) {
        const Measure1D& m = *laws[j].measure;
        for (std::size_t k = 0; k < u.size(); ++k)
            q[k] += weights[j] * m.quantile(u[k]);
    }
    // guard against quantile-solver jitter breaking monotonicity
    for (std::size_t k = 1; k < q.size(); ++k) q[k] = std::max(q[k], q[k - 1]);

    auto qstar = std::make_shared<PiecewiseQuantile>(u, q);
    std::vector<Atom> atoms = detect_atoms(*qstar);

    // continuous remainder: drop atom u-intervals, renormalize u to [0,1]
    std::shared_ptr<PiecewiseQuantile> cont;
    double atom_mass = 0.0;
    for (const Atom& a : atoms) atom_mass += a.mass;
    if (atom_mass < 1.0 - 1e-9) {
        std::vector<double> uc, qc;
        uc.reserve(u.size());
        qc.reserve(u.size());
        double removed = 0.0;
        std::size_t a = 0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            while (a < atoms.size() &&
                   qstar->quantile(u[k]) > atoms[a].radius)
                removed += atoms[a++].mass;
            bool inside = a < atoms.size() &&
                          std::fabs(q[k] - atoms[a].radius) <=
                              1e-8 * std::max(qstar->r_max(), 1e-300);
            if (inside) continue;
            double un = (u[k] - removed) / (1.0 - atom_mass);
            un = std::clamp(un, 0.0, 1.0);
            if (!uc.empty() && un <= uc.back()) continue;
            uc.push_back(un);
            qc.push_back(q[k]);
        }
        if (uc.size() >= 2) {
            uc.front() = 0.0;
            if (uc.back() != 1.0) {
                uc.push_back(1.0);
                qc.push_back(q.back());
            }
            cont = std::make_shared<PiecewiseQuantile>(std::move(uc),
                                                       std::move(qc));
        }
    }
    if (!cont) cont = std::make_shared<PiecewiseQuantile>(u, q);

    // fixed-point certificate: sum_j lambda_j C_{*->j}(Q*(u)) vs Q*(u),
    // probed at grid midpoints so the stored quantile is not compared
    // against itself at its own construction nodes
    double rmax = std::max(qstar->r_max(), 1e-300);
    double residual = 0.0;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        double um = 0.5 * (u[k] + u[k + 1]);
        double r = qstar->quantile(um);
        double v = qstar->cdf(r);
        double mapped = 0.0;
        for (std::size_t j = 0; j < laws.size(); ++j)
            mapped += weights[j] * laws[j].measure->quantile(v);
        double s = (mapped - r) / rmax;
        residual += s * s * (u[k + 1] - u[k]);
    }

    BarycenterResult result;
    result.center = std::move(center);
    result.measure = GeneralizedRadialMeasure{qstar, std::move(atoms), cont};
    result.residual = residual;
    result.weights = weights;
    return result;
}

BarycenterResult radial_barycenter(
    const std::vector<RadialDistribution>& dists,
    const std::vector<double>& weights, int grid_points) {
    std::vector<RadialLaw> laws;
    laws.reserve(dists.size());
    for (const auto& d : dists) laws.push_back(to_law(d));
    return radial_barycenter(laws, weights, grid_points);
}

double barycenter_functional(const RadialLaw& candidate,
                             const std::vector<RadialLaw>& laws,
                             const std::vector<double>& weights) {
    check_weights(weights, laws.size());
    double total = 0.0;
    for (std::size_t j = 0; j < laws.size(); ++j) {
        double w2 = w2_distance(laws[j], candidate);
        total += weights[j] * w2 * w2;
    }
    return total;
}

} // namespace radot
