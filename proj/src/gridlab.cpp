#include "radot/gridlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "radot/errors.hpp"

namespace radot {

GridGeometry GridGeometry::square(double half_extent, int n) {
    GridGeometry g;
    g.nx = g.ny = n;
    g.ox = g.oy = -half_extent;
    g.cx = g.cy = 2.0 * half_extent / n;
    return g;
}

namespace {

double raw_sum(const std::function<double(double, double)>& f,
               const GridGeometry& g) {
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) s += f(g.x_center(i), g.y_center(j));
    return s;
}

} // namespace

GridDensity rasterize(const std::function<double(double, double)>& formula,
                      const GridGeometry& geom, double leak_tol) {
    if (geom.nx < 2 || geom.ny < 2 || geom.cx <= 0.0 || geom.cy <= 0.0)
        throw InputError("rasterize: invalid grid geometry");

    GridDensity g;
    g.geom = geom;
    g.values.resize(geom.nx, geom.ny);
    double sum = 0.0;
    for (int i = 0; i < geom.nx; ++i)
        for (int j = 0; j < geom.ny; ++j) {
            double v = formula(geom.x_center(i), geom.y_center(j));
            if (!(v >= 0.0))
                throw MathError("rasterize: density is negative or NaN at a "
                                "cell center");
            g.values(i, j) = v;
            sum += v;
        }
    if (!(sum > 0.0)) throw MathError("rasterize: density carries no mass");

    // coverage check against the doubled domain at the same cell size
    GridGeometry big = geom;
    big.nx = 2 * geom.nx;
    big.ny = 2 * geom.ny;
    big.ox = geom.ox - 0.5 * geom.nx * geom.cx;
    big.oy = geom.oy - 0.5 * geom.ny * geom.cy;
    double big_sum = raw_sum(formula, big);
    double leak = (big_sum - sum) / big_sum;
    if (leak > leak_tol)
        throw MathError("rasterize: domain too small, estimated mass leakage "
                        + std::to_string(leak) + " exceeds tolerance " +
                        std::to_string(leak_tol));

    g.values /= g.values.sum();
    return g;
}

GridDensity rasterize(const RadialDistribution& dist,
                      const GridGeometry& geom, double leak_tol) {
    if (dist.dim() != 2)
        throw InputError("rasterize: only 2D distributions can be gridded");
    auto f = [&dist](double x, double y) {
        double xs[2] = {x, y};
        return dist.density(std::span<const double>(xs, 2));
    };
    return rasterize(f, geom, leak_tol);
}

std::array<double, 2> grid_mean(const GridDensity& g) {
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < g.geom.nx; ++i)
        for (int j = 0; j < g.geom.ny; ++j) {
            mx += g.values(i, j) * g.geom.x_center(i);
            my += g.values(i, j) * g.geom.y_center(j);
        }
    return {mx, my};
}

double grid_covariance_scalar(const GridDensity& g) {
    auto m = grid_mean(g);
    double s = 0.0;
    for (int i = 0; i < g.geom.nx; ++i)
        for (int j = 0; j < g.geom.ny; ++j) {
            double dx = g.geom.x_center(i) - m[0];
            double dy = g.geom.y_center(j) - m[1];
            s += g.values(i, j) * (dx * dx + dy * dy);
        }
    return 0.5 * s;
}

// --- entropic barycenter -----------------------------------------------------

namespace {

using Arr = Eigen::ArrayXXd;

Eigen::MatrixXd gauss_kernel_1d(int n, double origin, double cell,
                                double epsilon) {
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double d = (i - j) * cell;
            double v = std::exp(-d * d / epsilon);
            k(i, j) = v;
            k(j, i) = v;
        }
    (void)origin;
    return k;
}

Arr apply_kernel(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky,
                 const Arr& a) {
    return (kx * a.matrix() * ky).array();
}

Arr safe_div(const Arr& num, const Arr& den) {
    return num.binaryExpr(den, [](double n, double d) {
        return (d > 0.0 && n > 0.0) ? n / d : 0.0;
    });
}

Arr clamped_pow(const Arr& a, double p) {
    return a.unaryExpr([p](double v) {
        if (v <= 0.0) return 0.0;
        double r = std::pow(v, p);
        return std::clamp(r, 1e-280, 1e280);
    });
}

} // namespace

GridDensity entropic_barycenter(const std::vector<GridDensity>& densities,
                                const std::vector<double>& weights,
                                const SinkhornOptions& opts,
                                SolveStatus* status) {
    if (densities.empty())
        throw InputError("entropic_barycenter: no input densities");
    if (weights.size() != densities.size())
        throw InputError("entropic_barycenter: weight count mismatch");
    const GridGeometry geom = densities[0].geom;
    for (const auto& d : densities)
        if (!(d.geom == geom))
            throw InputError("entropic_barycenter: grids must share "
                             "geometry");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InputError("entropic_barycenter: negative weight");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-12)
        throw InputError("entropic_barycenter: weights must sum to 1");
    if (!(opts.epsilon > 0.0))
        throw InputError("entropic_barycenter: epsilon must be positive");
    double min_cell = std::min(geom.cx, geom.cy);
    if (min_cell * min_cell / opts.epsilon > 700.0)
        throw MathError("entropic_barycenter: kernel underflows at this "
                        "epsilon; increase epsilon or enable annealing from "
                        "a larger value");

    const std::size_t nmarg = densities.size();
    const int stages = std::max(opts.anneal_stages, 1);

    Arr ones = Arr::Ones(geom.nx, geom.ny);
    Arr b = ones / (geom.nx * geom.ny);
    std::vector<Arr> v(nmarg, ones);
    Arr d = ones;
    bool converged = false;
    double prev_eps = 0.0;

    for (int s = 0; s < stages; ++s) {
        double eps = opts.epsilon *
                     std::pow(opts.anneal_factor, stages - 1 - s);
        if (s > 0) {
            // carry potentials across the epsilon schedule:
            // f = eps_prev * log v stays fixed, so v -> v^(eps_prev/eps)
            double ratio = prev_eps / eps;
            for (auto& vj : v) vj = clamped_pow(vj, ratio);
            // the debiasing fixed point is epsilon-specific; restart it
            d = ones;
        }
        prev_eps = eps;
        Eigen::MatrixXd kx = gauss_kernel_1d(geom.nx, geom.ox, geom.cx, eps);
        Eigen::MatrixXd ky = gauss_kernel_1d(geom.ny, geom.oy, geom.cy, eps);

        converged = false;
        for (int it = 0; it < opts.iters; ++it) {
            Arr b_new = opts.debias ? d : ones;
            std::vector<Arr> phi(nmarg);
            for (std::size_t j = 0; j < nmarg; ++j) {
                Arr kv = apply_kernel(kx, ky, v[j]);
                Arr u = safe_div(densities[j].values, kv);
                phi[j] = apply_kernel(kx, ky, u);
                b_new *= clamped_pow(phi[j], weights[j]);
            }
            double d_shift = 0.0;
            if (opts.debias) {
                Arr kd = apply_kernel(kx, ky, d);
                Arr d_new = (d * safe_div(b_new, kd)).sqrt();
                d_shift = (d_new - d).abs().maxCoeff() /
                          std::max(d_new.abs().maxCoeff(), 1e-300);
                d = d_new;
            }
            for (std::size_t j = 0; j < nmarg; ++j)
                v[j] = safe_div(b_new, phi[j]);
            if (!b_new.isFinite().all())
                throw ConvergenceError("entropic_barycenter: scaling "
                                       "overflow; increase epsilon");
            double diff = (b_new - b).abs().maxCoeff();
            b = b_new;
            // b can look stationary while the debiasing potential is still
            // drifting, so both must settle before a stage may stop early
            if (diff < opts.stop_tol && d_shift < 1e-8) {
                converged = true;
                break;
            }
        }
    }

    if (status) *status = converged ? SolveStatus::converged
                                    : SolveStatus::max_iters;
    GridDensity out;
    out.geom = geom;
    out.values = b / b.sum();
    return out;
}

// --- contours ----------------------------------------------------------------

namespace {

struct Seg {
    std::array<double, 2> p0, p1;
};

std::int64_t quantize(double v, double scale) {
    return static_cast<std::int64_t>(std::llround(v / scale * 4096.0));
}

} // namespace

ContourSet extract_contours(const GridDensity& grid,
                            const std::vector<double>& levels) {
    const GridGeometry& g = grid.geom;
    double maxval = grid.values.maxCoeff();
    ContourSet out;
    out.levels = levels;
    out.curves.resize(levels.size());

    for (std::size_t li = 0; li < levels.size(); ++li) {
        double level = levels[li];
        if (!(level > 0.0))
            throw InputError("extract_contours: levels must be positive");
        if (level >= maxval) continue; // empty level set

        std::vector<Seg> segs;
        auto interp = [&](double xa, double ya, double va, double xb,
                          double yb, double vb) -> std::array<double, 2> {
            double t = (level - va) / (vb - va);
            return {xa + t * (xb - xa), ya + t * (yb - ya)};
        };
        for (int i = 0; i + 1 < g.nx; ++i) {
            for (int j = 0; j + 1 < g.ny; ++j) {
                double v00 = grid.values(i, j), v10 = grid.values(i + 1, j);
                double v11 = grid.values(i + 1, j + 1),
                       v01 = grid.values(i, j + 1);
                int code = (v00 > level) | ((v10 > level) << 1) |
                           ((v11 > level) << 2) | ((v01 > level) << 3);
                if (code == 0 || code == 15) continue;
                double x0 = g.x_center(i), x1 = g.x_center(i + 1);
                double y0 = g.y_center(j), y1 = g.y_center(j + 1);
                // edge crossings
                std::array<double, 2> eb{}, et{}, el{}, er{};
                bool hb = (v00 > level) != (v10 > level);
                bool ht = (v01 > level) != (v11 > level);
                bool hl = (v00 > level) != (v01 > level);
                bool hr = (v10 > level) != (v11 > level);
                if (hb) eb = interp(x0, y0, v00, x1, y0, v10);
                if (ht) et = interp(x0, y1, v01, x1, y1, v11);
                if (hl) el = interp(x0, y0, v00, x0, y1, v01);
                if (hr) er = interp(x1, y0, v10, x1, y1, v11);
                if (hb && hl && ht && hr) {
                    // ambiguous saddle: split by the center average
                    double c = 0.25 * (v00 + v10 + v01 + v11);
                    if ((c > level) == (v00 > level)) {
                        segs.push_back({eb, er});
                        segs.push_back({et, el});
                    } else {
                        segs.push_back({eb, el});
                        segs.push_back({et, er});
                    }
                } else {
                    std::vector<std::array<double, 2>> pts;
                    if (hb) pts.push_back(eb);
                    if (hr) pts.push_back(er);
                    if (ht) pts.push_back(et);
                    if (hl) pts.push_back(el);
                    if (pts.size() == 2) segs.push_back({pts[0], pts[1]});
                }
            }
        }

        // stitch segments into polylines
        double qscale = std::min(g.cx, g.cy);
        std::map<std::pair<std::int64_t, std::int64_t>,
                 std::vector<std::size_t>>
            index;
        auto key = [&](const std::array<double, 2>& p) {
            return std::make_pair(quantize(p[0], qscale),
                                  quantize(p[1], qscale));
        };
        for (std::size_t s = 0; s < segs.size(); ++s) {
            index[key(segs[s].p0)].push_back(s);
            index[key(segs[s].p1)].push_back(s);
        }
        std::vector<bool> used(segs.size(), false);
        auto next_seg = [&](const std::array<double, 2>& p,
                            std::size_t self) -> std::size_t {
            auto it = index.find(key(p));
            if (it == index.end()) return segs.size();
            for (std::size_t s : it->second)
                if (!used[s] && s != self) return s;
            return segs.size();
        };

        for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
            if (used[s0]) continue;
            used[s0] = true;
            std::vector<std::array<double, 2>> chain{segs[s0].p0,
                                                     segs[s0].p1};
            // extend forward, then (if open) backward
            for (int dir = 0; dir < 2; ++dir) {
                while (true) {
                    std::size_t s = next_seg(chain.back(), segs.size());
                    if (s == segs.size()) break;
                    used[s] = true;
                    auto kb = key(chain.back());
                    chain.push_back(key(segs[s].p0) == kb ? segs[s].p1
                                                          : segs[s].p0);
                    if (key(chain.front()) == key(chain.back())) break;
                }
                if (key(chain.front()) == key(chain.back())) break;
                std::reverse(chain.begin(), chain.end());
            }
            Polyline pl;
            pl.closed = chain.size() > 2 &&
                        key(chain.front()) == key(chain.back());
            if (pl.closed) chain.back() = chain.front();
            pl.pts = std::move(chain);
            if (pl.closed) {
                double area = 0.0;
                for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
                    area += pl.pts[k][0] * pl.pts[k + 1][1] -
                            pl.pts[k + 1][0] * pl.pts[k][1];
                if (area < 0.0)
                    std::reverse(pl.pts.begin(), pl.pts.end());
            }
            out.curves[li].push_back(std::move(pl));
        }
    }
    return out;
}

// --- ellipse fitting ---------------------------------------------------------

namespace {

struct EllipseParams {
    double cx, cy, a, b, theta;
};

double point_distance(const EllipseParams& e, double px, double py) {
    double dx = px - e.cx, dy = py - e.cy;
    double ct = std::cos(e.theta), st = std::sin(e.theta);
    double x = ct * dx + st * dy;
    double y = -st * dx + ct * dy;
    auto dist2 = [&](double t) {
        double ex = e.a * std::cos(t) - x;
        double ey = e.b * std::sin(t) - y;
        return ex * ex + ey * ey;
    };
    // coarse scan + golden-section refinement
    const int nscan = 64;
    double best_t = 0.0, best = dist2(0.0);
    for (int k = 1; k < nscan; ++k) {
        double t = 2.0 * M_PI * k / nscan;
        double d2 = dist2(t);
        if (d2 < best) {
            best = d2;
            best_t = t;
        }
    }
    double lo = best_t - 2.0 * M_PI / nscan;
    double hi = best_t + 2.0 * M_PI / nscan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
    double f1 = dist2(t1), f2 = dist2(t2);
    for (int it = 0; it < 48; ++it) {
        if (f1 < f2) {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - gr * (hi - lo);
            f1 = dist2(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + gr * (hi - lo);
            f2 = dist2(t2);
        }
    }
    return std::sqrt(std::min(f1, f2));
}

double rms_distance(const EllipseParams& e,
                    const std::vector<std::array<double, 2>>& pts) {
    double s = 0.0;
    for (const auto& p : pts) {
        double d = point_distance(e, p[0], p[1]);
        s += d * d;
    }
    return std::sqrt(s / pts.size());
}

// Direct ellipse-specific conic fit (Halir & Flusser's stable variant of
// the Fitzgibbon method), on pre-normalized coordinates.
EllipseParams fit_conic(const std::vector<std::array<double, 2>>& pts) {
    const std::size_t n = pts.size();
    Eigen::MatrixXd d1(n, 3), d2(n, 3);
    for (std::size_t k = 0; k < n; ++k) {
        double x = pts[k][0], y = pts[k][1];
        d1(k, 0) = x * x;
        d1(k, 1) = x * y;
        d1(k, 2) = y * y;
        d2(k, 0) = x;
        d2(k, 1) = y;
        d2(k, 2) = 1.0;
    }
    Eigen::Matrix3d s1 = d1.transpose() * d1;
    Eigen::Matrix3d s2 = d1.transpose() * d2;
    Eigen::Matrix3d s3 = d2.transpose() * d2;
    Eigen::Matrix3d t = -s3.ldlt().solve(s2.transpose());
    Eigen::Matrix3d m0 = s1 + s2 * t;
    Eigen::Matrix3d m;
    m.row(0) = m0.row(2) / 2.0;
    m.row(1) = -m0.row(1);
    m.row(2) = m0.row(0) / 2.0;

    Eigen::EigenSolver<Eigen::Matrix3d> es(m);
    Eigen::Vector3d a1 = Eigen::Vector3d::Zero();
    bool found = false;
    for (int k = 0; k < 3; ++k) {
        if (std::fabs(es.eigenvalues()[k].imag()) > 1e-10) continue;
        Eigen::Vector3d v = es.eigenvectors().col(k).real();
        double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (cond > 0.0) {
            a1 = v;
            found = true;
            break;
        }
    }
    if (!found)
        throw MathError("ellipse fit: no elliptical solution (degenerate "
                        "point set)");
    Eigen::Vector3d a2 = t * a1;
    double ca = a1(0), cb = a1(1), cc = a1(2);
    double cd = a2(0), ce = a2(1), cf = a2(2);

    double denom = cb * cb - 4.0 * ca * cc; // < 0 for an ellipse
    EllipseParams e;
    e.cx = (2.0 * cc * cd - cb * ce) / denom;
    e.cy = (2.0 * ca * ce - cb * cd) / denom;
    double f0 = ca * e.cx * e.cx + cb * e.cx * e.cy + cc * e.cy * e.cy +
                cd * e.cx + ce * e.cy + cf;
    Eigen::Matrix2d q;
    q << ca, cb / 2.0, cb / 2.0, cc;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(q);
    double l0 = qe.eigenvalues()(0), l1 = qe.eigenvalues()(1);
    double r0 = -f0 / l0, r1 = -f0 / l1;
    if (!(r0 > 0.0 && r1 > 0.0))
        throw MathError("ellipse fit: conic is not a real ellipse");
    double ax0 = std::sqrt(r0), ax1 = std::sqrt(r1);
    if (ax0 >= ax1) {
        e.a = ax0;
        e.b = ax1;
        e.theta = std::atan2(qe.eigenvectors()(1, 0), qe.eigenvectors()(0, 0));
    } else {
        e.a = ax1;
        e.b = ax0;
        e.theta = std::atan2(qe.eigenvectors()(1, 1), qe.eigenvectors()(0, 1));
    }
    return e;
}

EllipseParams refine_geometric(EllipseParams e,
                               const std::vector<std::array<double, 2>>& pts) {
    double cost = rms_distance(e, pts);
    double mu = 1e-3;
    for (int it = 0; it < 15; ++it) {
        const double scale = 0.5 * (e.a + e.b);
        double h[5] = {1e-7 * scale, 1e-7 * scale, 1e-7 * scale,
                       1e-7 * scale, 1e-7};
        Eigen::MatrixXd jac(pts.size(), 5);
        Eigen::VectorXd res(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k)
            res(k) = point_distance(e, pts[k][0], pts[k][1]);
        for (int p = 0; p < 5; ++p) {
            EllipseParams ep = e;
            double* fields[5] = {&ep.cx, &ep.cy, &ep.a, &ep.b, &ep.theta};
            *fields[p] += h[p];
            for (std::size_t k = 0; k < pts.size(); ++k)
                jac(k, p) =
                    (point_distance(ep, pts[k][0], pts[k][1]) - res(k)) /
                    h[p];
        }
        Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
        Eigen::Matrix<double, 5, 1> jtr = jac.transpose() * res;
        Eigen::Matrix<double, 5, 1> step =
            -(jtj + mu * Eigen::Matrix<double, 5, 5>::Identity())
                 .ldlt()
                 .solve(jtr);
        EllipseParams trial = e;
        trial.cx += step(0);
        trial.cy += step(1);
        trial.a += step(2);
        trial.b += step(3);
        trial.theta += step(4);
        if (trial.a <= 0.0 || trial.b <= 0.0) {
            mu *= 10.0;
            continue;
        }
        double trial_cost = rms_distance(trial, pts);
        if (trial_cost < cost) {
            e = trial;
            if (cost - trial_cost < 1e-12 * cost) {
                cost = trial_cost;
                break;
            }
            cost = trial_cost;
            mu = std::max(mu * 0.3, 1e-9);
        } else {
            mu *= 10.0;
        }
    }
    if (e.a < e.b) {
        std::swap(e.a, e.b);
        e.theta += 0.5 * M_PI;
    }
    return e;
}

} // namespace

EllipseFit ellipse_deviation(const Polyline& polyline) {
    if (!polyline.closed)
        throw InputError("ellipse_deviation: polyline must be closed");
    std::vector<std::array<double, 2>> pts(polyline.pts.begin(),
                                           polyline.pts.end());
    if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
    if (pts.size() < 16)
        throw InputError("ellipse_deviation: need at least 16 points");

    // normalize for conditioning
    double mx = 0.0, my = 0.0;
    for (auto& p : pts) {
        mx += p[0];
        my += p[1];
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0, mr = 0.0;
    for (auto& p : pts) {
        double dx = p[0] - mx, dy = p[1] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        mr += std::sqrt(dx * dx + dy * dy);
    }
    mr /= pts.size();
    double tr = sxx + syy;
    double det = sxx * syy - sxy * sxy;
    double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    double lmin = tr / 2.0 - disc, lmax = tr / 2.0 + disc;
    if (!(mr > 0.0) || lmin < 1e-12 * lmax)
        throw MathError("ellipse_deviation: degenerate (collinear) point "
                        "set");

    std::vector<std::array<double, 2>> norm(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
        norm[k] = {(pts[k][0] - mx) / mr, (pts[k][1] - my) / mr};

    EllipseParams e = fit_conic(norm);
    e = refine_geometric(e, norm);

    // back to world coordinates
    EllipseParams w{mx + mr * e.cx, my + mr * e.cy, mr * e.a, mr * e.b,
                    e.theta};
    double rms = rms_distance(w, pts);
    double mean_radius = 0.0;
    for (auto& p : pts) {
        double dx = p[0] - w.cx, dy = p[1] - w.cy;
        mean_radius += std::sqrt(dx * dx + dy * dy);
    }
    mean_radius /= pts.size();

    EllipseFit fit;
    fit.center = {w.cx, w.cy};
    fit.a = w.a;
    fit.b = w.b;
    fit.angle = w.theta;
    fit.deviation = rms / mean_radius;
    return fit;
}

// --- counterexamples ---------------------------------------------------------

namespace {

const Polyline* principal_curve(const std::vector<Polyline>& curves) {
    const Polyline* best = nullptr;
    double best_area = -1.0;
    for (const auto& pl : curves) {
        if (!pl.closed) continue;
        double area = 0.0;
        for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
            area += pl.pts[k][0] * pl.pts[k + 1][1] -
                    pl.pts[k + 1][0] * pl.pts[k][1];
        area = std::fabs(area) / 2.0;
        if (area > best_area) {
            best_area = area;
            best = &pl;
        }
    }
    return best;
}

std::vector<double> contour_deviations(const GridDensity& g,
                                       const std::vector<double>& fractions) {
    double mx = g.values.maxCoeff();
    std::vector<double> levels;
    for (double f : fractions) levels.push_back(f * mx);
    ContourSet cs = extract_contours(g, levels);
    std::vector<double> out;
    for (const auto& curves : cs.curves) {
        const Polyline* pl = principal_curve(curves);
        out.push_back(pl ? ellipse_deviation(*pl).deviation : 0.0);
    }
    return out;
}

} // namespace

CounterexampleReport counterexample_run(int case_id,
                                        const CounterexampleConfig& config) {
    if (case_id != 1 && case_id != 2)
        throw InputError("counterexample_run: case must be 1 or 2");

    // the far polynomial/stretched-exponential tails fall outside any grid
    // of this resolution; the contour diagnostics only need the bulk
    const double leak_tol = 2e-2;
    double half = (case_id == 1) ? 4.0 : 8.0;
    GridGeometry geom = GridGeometry::square(half, config.n);

    std::function<double(double, double)> f1, f2;
    if (case_id == 1) {
        f1 = [](double x, double y) { return std::exp(-(x * x + 4 * y * y)); };
        f2 = [](double x, double y) {
            return std::exp(-std::pow(4 * x * x + y * y, 0.6));
        };
    } else {
        f1 = [](double x, double y) {
            return std::max(1.0 - 0.25 * x * x - y * y, 0.0);
        };
        f2 = [](double x, double y) {
            double q = 1.0 + 4 * x * x + y * y;
            return 1.0 / (q * q);
        };
    }
    GridDensity g1 = rasterize(f1, geom, leak_tol);
    GridDensity g2 = rasterize(f2, geom, leak_tol);

    double domain_len = 2.0 * half;
    SinkhornOptions opts;
    opts.epsilon = config.epsilon_rel * domain_len * domain_len;
    opts.iters = config.iters;

    GridDensity bary = entropic_barycenter({g1, g2}, {0.5, 0.5}, opts);

    // control: a true elliptical (radial gaussian) family at the same
    // solver settings calibrates the blur floor of the deviation metric
    GridDensity c1 = rasterize(
        RadialDistribution({0.0, 0.0}, 0.2 * half, RadialProfile::gaussian(2)),
        geom, leak_tol);
    GridDensity c2 = rasterize(
        RadialDistribution({0.0, 0.0}, 0.3 * half, RadialProfile::gaussian(2)),
        geom, leak_tol);
    GridDensity control = entropic_barycenter({c1, c2}, {0.5, 0.5}, opts);

    CounterexampleReport rep;
    rep.case_id = case_id;
    rep.geom = geom;
    double mx = bary.values.maxCoeff();
    for (double f : config.level_fractions) rep.levels.push_back(f * mx);
    rep.contours = extract_contours(bary, rep.levels);
    for (const auto& curves : rep.contours.curves) {
        const Polyline* pl = principal_curve(curves);
        rep.deviations.push_back(pl ? ellipse_deviation(*pl).deviation : 0.0);
    }
    rep.control_deviations = contour_deviations(control,
                                                config.level_fractions);
    rep.marginal_deviations = {
        contour_deviations(g1, {config.level_fractions.back()}).front(),
        contour_deviations(g2, {config.level_fractions.back()}).front()};

    rep.outer_exceeds_inner = rep.deviations.back() > rep.deviations.front();
    rep.outer_exceeds_control =
        rep.deviations.back() > 2.0 * rep.control_deviations.back();
    return rep;
}

// --- I/O ---------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_grid_csv(std::ostream& os, const GridDensity& g) {
    os << "nx,ny,ox,oy,cx,cy\n";
    os << g.geom.nx << ',' << g.geom.ny << ',' << fmt17(g.geom.ox) << ','
       << fmt17(g.geom.oy) << ',' << fmt17(g.geom.cx) << ','
       << fmt17(g.geom.cy) << '\n';
    for (int i = 0; i < g.geom.nx; ++i) {
        for (int j = 0; j < g.geom.ny; ++j) {
            if (j) os << ',';
            os << fmt17(g.values(i, j));
        }
        os << '\n';
    }
}

GridDensity read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("nx,ny", 0) != 0)
        throw InputError("grid csv: missing header");
    if (!std::getline(is, line))
        throw InputError("grid csv: missing geometry row");
    GridDensity g;
    {
        std::istringstream ss(line);
        std::string tok;
        double vals[6];
        for (int k = 0; k < 6; ++k) {
            if (!std::getline(ss, tok, ','))
                throw InputError("grid csv: bad geometry row");
            vals[k] = std::stod(tok);
        }
        g.geom.nx = static_cast<int>(vals[0]);
        g.geom.ny = static_cast<int>(vals[1]);
        g.geom.ox = vals[2];
        g.geom.oy = vals[3];
        g.geom.cx = vals[4];
        g.geom.cy = vals[5];
    }
    g.values.resize(g.geom.nx, g.geom.ny);
    for (int i = 0; i < g.geom.nx; ++i) {
        if (!std::getline(is, line))
            throw InputError("grid csv: truncated value rows");
        std::istringstream ss(line);
        std::string tok;
        for (int j = 0; j < g.geom.ny; ++j) {
            if (!std::getline(ss, tok, ','))
                throw InputError("grid csv: short value row");
            g.values(i, j) = std::stod(tok);
        }
    }
    return g;
}

void write_grid_binary(std::ostream& os, const GridDensity& g) {
    os.write("GDEN1", 5);
    std::int32_t n[2] = {g.geom.nx, g.geom.ny};
    os.write(reinterpret_cast<const char*>(n), sizeof n);
    double geo[4] = {g.geom.ox, g.geom.oy, g.geom.cx, g.geom.cy};
    os.write(reinterpret_cast<const char*>(geo), sizeof geo);
    os.write(reinterpret_cast<const char*>(g.values.data()),
             static_cast<std::streamsize>(sizeof(double) * g.values.size()));
}

GridDensity read_grid_binary(std::istream& is) {
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "GDEN1", 5) != 0)
        throw InputError("grid binary: bad magic");
    std::int32_t n[2];
    is.read(reinterpret_cast<char*>(n), sizeof n);
    double geo[4];
    is.read(reinterpret_cast<char*>(geo), sizeof geo);
    GridDensity g;
    g.geom.nx = n[0];
    g.geom.ny = n[1];
    g.geom.ox = geo[0];
    g.geom.oy = geo[1];
    g.geom.cx = geo[2];
    g.geom.cy = geo[3];
    if (g.geom.nx <= 0 || g.geom.ny <= 0)
        throw InputError("grid binary: bad dimensions");
    g.values.resize(g.geom.nx, g.geom.ny);
    is.read(reinterpret_cast<char*>(g.values.data()),
            static_cast<std::streamsize>(sizeof(double) * g.values.size()));
    if (!is) throw InputError("grid binary: truncated values");
    return g;
}

void write_contours_csv(std::ostream& os, const ContourSet& contours) {
    os << "level,curve,x,y\n";
    for (std::size_t li = 0; li < contours.levels.size(); ++li) {
        for (std::size_t c = 0; c < contours.curves[li].size(); ++c) {
            for (const auto& p : contours.curves[li][c].pts)
                os << fmt17(contours.levels[li]) << ',' << c << ','
                   << fmt17(p[0]) << ',' << fmt17(p[1]) << '\n';
        }
    }
}

} // namespace radot
