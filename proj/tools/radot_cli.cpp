// radot: radial optimal transport toolbox
//
// Subcommands: distance, map-eval, interpolate, barycenter, counterexample,
// sample, oracle-w2. Every subcommand accepts --config <json> whose keys
// mirror the long flags; explicit flags win over config values.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radot/barycenter.hpp"
#include "radot/errors.hpp"
#include "radot/gridlab.hpp"
#include "radot/oracle.hpp"
#include "radot/profile_spec.hpp"
#include "radot/transport.hpp"

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw radot::InputError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw radot::InputError(std::string("config file: invalid JSON: ") +
                                e.what());
    }
    if (!j.is_object())
        throw radot::InputError("config file: expected a JSON object");
    return j;
}

template <typename T>
void merge(const CLI::Option* opt, T& value, const json& cfg,
           const char* key) {
    if (opt->count() == 0 && cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception&) {
            throw radot::InputError(std::string("config file: bad value for "
                                                "\"") +
                                    key + "\"");
        }
    }
}

void require_set(bool ok, const char* what) {
    if (!ok)
        throw radot::InputError(std::string("missing required option ") +
                                what);
}

// temp file + rename, so readers never observe a half-written artifact
void write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw radot::InputError("cannot write " + tmp);
        out << content;
        if (!out) throw radot::InputError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

radot::RadialDistribution load_spec(const std::string& path) {
    return radot::load_profile_spec(path);
}

struct DistanceCmd {
    std::string spec, spec2, out, config;
};

int run_distance(const DistanceCmd& c) {
    auto d0 = load_spec(c.spec);
    auto d1 = load_spec(c.spec2);
    auto law0 = radot::to_law(d0);
    auto law1 = radot::to_law(d1);
    double trans2 = 0.0;
    for (std::size_t i = 0; i < law0.center.size(); ++i) {
        double d = law0.center[i] - law1.center[i];
        trans2 += d * d;
    }
    double radial = radot::w2_radial(*law0.measure, *law1.measure);
    double w2 = std::sqrt(trans2 + radial * radial);

    std::cout << fmt17(w2) << "\n";
    if (!c.out.empty()) {
        json j{{"w2", w2},
               {"translation_part", std::sqrt(trans2)},
               {"radial_part", radial}};
        write_file(c.out, j.dump(2) + "\n");
    }
    return 0;
}

struct MapEvalCmd {
    std::string spec, spec2, out, config;
    std::vector<double> radii;
    int n = 101;
};

int run_map_eval(const MapEvalCmd& c) {
    auto d0 = load_spec(c.spec);
    auto d1 = load_spec(c.spec2);
    radot::RadialMap cmap = radot::radial_rearrangement(d0, d1);

    std::vector<double> radii = c.radii;
    if (radii.empty()) {
        double rtop = cmap.source().quantile(0.999);
        for (int k = 0; k < c.n; ++k)
            radii.push_back(rtop * k / (c.n - 1));
    }
    std::vector<double> mapped = cmap(radii);

    std::ostringstream os;
    os << "r,C\n";
    for (std::size_t k = 0; k < radii.size(); ++k)
        os << fmt17(radii[k]) << ',' << fmt17(mapped[k]) << '\n';
    if (c.out.empty())
        std::cout << os.str();
    else
        write_file(c.out, os.str());
    return 0;
}

struct InterpolateCmd {
    std::string spec, spec2, out, config;
    std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
    int grid = 201;
};

int run_interpolate(const InterpolateCmd& c) {
    auto d0 = load_spec(c.spec);
    auto d1 = load_spec(c.spec2);
    for (double t : c.ts)
        if (t < 0.0 || t > 1.0)
            throw radot::InputError("interpolate: t must lie in [0, 1]");
    if (c.grid < 2)
        throw radot::InputError("interpolate: --grid must be >= 2");

    std::ostringstream os;
    os << "t,u,Q\n";
    for (double t : c.ts) {
        auto law = radot::mccann_interpolate(d0, d1, t);
        for (int k = 0; k < c.grid; ++k) {
            double u = static_cast<double>(k) / (c.grid - 1);
            os << fmt17(t) << ',' << fmt17(u) << ','
               << fmt17(law.measure->quantile(u)) << '\n';
        }
    }
    if (c.out.empty())
        std::cout << os.str();
    else
        write_file(c.out, os.str());

    // constant-speed certificate over the requested times
    if (c.ts.size() >= 2) {
        double w01 = radot::w2_distance(d0, d1);
        bool pass = true;
        for (std::size_t i = 0; i + 1 < c.ts.size(); ++i) {
            auto ls = radot::mccann_interpolate(d0, d1, c.ts[i]);
            auto lt = radot::mccann_interpolate(d0, d1, c.ts[i + 1]);
            double seg = radot::w2_distance(ls, lt);
            double want = std::fabs(c.ts[i + 1] - c.ts[i]) * w01;
            if (std::fabs(seg - want) > 1e-6 * std::max(w01, 1e-12))
                pass = false;
        }
        std::cout << "geodesic_check " << (pass ? "pass" : "fail") << "\n";
        if (!pass) return 4;
    }
    return 0;
}

struct BarycenterCmd {
    std::string out, config;
    std::vector<std::string> specs;
    std::vector<double> weights;
    int grid = 4096;
};

int run_barycenter(const BarycenterCmd& c) {
    require_set(!c.specs.empty(), "--specs");
    std::vector<radot::RadialDistribution> dists;
    for (const auto& path : c.specs) dists.push_back(load_spec(path));
    std::vector<double> weights = c.weights;
    if (weights.empty())
        weights.assign(dists.size(), 1.0 / dists.size());

    auto result = radot::radial_barycenter(dists, weights, c.grid);

    json atoms = json::array();
    for (const auto& a : result.measure.atoms)
        atoms.push_back({{"radius", a.radius}, {"mass", a.mass}});
    json j{{"center", result.center},
           {"weights", result.weights},
           {"residual", result.residual},
           {"atom_mass", result.measure.atom_mass()},
           {"atoms", atoms}};

    std::ostringstream csv;
    csv << "u,Q\n";
    const auto& u = result.measure.quantile->ugrid();
    const auto& q = result.measure.quantile->values();
    for (std::size_t k = 0; k < u.size(); ++k)
        csv << fmt17(u[k]) << ',' << fmt17(q[k]) << '\n';

    if (c.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_file(c.out + ".json", j.dump(2) + "\n");
        write_file(c.out + ".csv", csv.str());
        std::cout << "residual " << fmt17(result.residual) << "\n";
    }
    if (result.residual > radot::tol::residual) {
        std::cerr << "barycenter fixed-point residual "
                  << fmt17(result.residual) << " exceeds tolerance\n";
        return 4;
    }
    return 0;
}

struct CounterexampleCmd {
    std::string out = "counterexample", config;
    int case_id = 1;
    int grid = 256;
    double epsilon = 3e-4;
    int iters = 300;
};

int run_counterexample(const CounterexampleCmd& c) {
    radot::CounterexampleConfig cfg;
    cfg.n = c.grid;
    cfg.epsilon_rel = c.epsilon;
    cfg.iters = c.iters;
    auto rep = radot::counterexample_run(c.case_id, cfg);

    std::ostringstream contours;
    radot::write_contours_csv(contours, rep.contours);
    std::string prefix = c.out + "_case" + std::to_string(c.case_id);
    write_file(prefix + "_contours.csv", contours.str());

    json j{{"case", rep.case_id},
           {"nx", rep.geom.nx},
           {"ny", rep.geom.ny},
           {"ox", rep.geom.ox},
           {"oy", rep.geom.oy},
           {"cx", rep.geom.cx},
           {"cy", rep.geom.cy},
           {"levels", rep.levels},
           {"deviations", rep.deviations},
           {"control_deviations", rep.control_deviations},
           {"marginal_deviations", rep.marginal_deviations},
           {"outer_exceeds_inner", rep.outer_exceeds_inner},
           {"outer_exceeds_control", rep.outer_exceeds_control}};
    write_file(prefix + "_report.json", j.dump(2) + "\n");

    std::cout << "case " << rep.case_id << ": inner deviation "
              << fmt17(rep.deviations.front()) << ", outer deviation "
              << fmt17(rep.deviations.back()) << ", control outer "
              << fmt17(rep.control_deviations.back()) << "\n";
    std::cout << "outer_exceeds_inner "
              << (rep.outer_exceeds_inner ? "true" : "false")
              << ", outer_exceeds_control "
              << (rep.outer_exceeds_control ? "true" : "false") << "\n";
    return 0;
}

struct SampleCmd {
    std::string spec, out, config;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
};

int run_sample(const SampleCmd& c) {
    auto dist = load_spec(c.spec);
    auto cloud = radot::sample(dist, c.n, c.seed);

    std::ostringstream os;
    for (std::size_t i = 0; i < cloud.dim; ++i) os << 'x' << (i + 1) << ',';
    os << "w\n";
    for (std::size_t k = 0; k < cloud.size(); ++k) {
        const double* p = cloud.point(k);
        for (std::size_t i = 0; i < cloud.dim; ++i)
            os << fmt17(p[i]) << ',';
        os << fmt17(cloud.weights[k]) << '\n';
    }
    if (c.out.empty())
        std::cout << os.str();
    else
        write_file(c.out, os.str());
    return 0;
}

struct OracleW2Cmd {
    std::string spec, spec2, out, config;
    std::size_t n = 2000;
    std::uint64_t seed = 1;
};

int run_oracle_w2(const OracleW2Cmd& c) {
    auto d0 = load_spec(c.spec);
    auto d1 = load_spec(c.spec2);
    auto est = radot::empirical_w2(d0, d1, c.n, c.seed);
    json j{{"w2_hat", est.value}, {"sigma", est.sigma}};
    std::cout << j.dump(2) << "\n";
    if (!c.out.empty()) write_file(c.out, j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radot: optimal transport between radially contoured "
                 "distributions"};
    app.require_subcommand(1);

    DistanceCmd dc;
    auto* dist_cmd = app.add_subcommand("distance",
                                        "W2 distance between two laws");
    auto* dc_spec = dist_cmd->add_option("--spec", dc.spec, "first law");
    auto* dc_spec2 = dist_cmd->add_option("--spec2", dc.spec2, "second law");
    auto* dc_out = dist_cmd->add_option("--out", dc.out, "JSON output path");
    dist_cmd->add_option("--config", dc.config, "JSON config file");

    MapEvalCmd mc;
    auto* map_cmd = app.add_subcommand("map-eval",
                                       "evaluate the radial rearrangement C");
    auto* mc_spec = map_cmd->add_option("--spec", mc.spec, "source law");
    auto* mc_spec2 = map_cmd->add_option("--spec2", mc.spec2, "target law");
    auto* mc_radii = map_cmd->add_option("--radii", mc.radii,
                                         "explicit radii to evaluate at");
    auto* mc_n = map_cmd->add_option("--grid", mc.n,
                                     "number of default radii");
    auto* mc_out = map_cmd->add_option("--out", mc.out, "CSV output path");
    map_cmd->add_option("--config", mc.config, "JSON config file");

    InterpolateCmd ic;
    auto* int_cmd = app.add_subcommand("interpolate",
                                       "McCann interpolation quantile curves");
    auto* ic_spec = int_cmd->add_option("--spec", ic.spec, "first law");
    auto* ic_spec2 = int_cmd->add_option("--spec2", ic.spec2, "second law");
    auto* ic_t = int_cmd->add_option("--t", ic.ts, "interpolation times");
    auto* ic_grid = int_cmd->add_option("--grid", ic.grid,
                                        "u samples per curve");
    auto* ic_out = int_cmd->add_option("--out", ic.out, "CSV output path");
    int_cmd->add_option("--config", ic.config, "JSON config file");

    BarycenterCmd bc;
    auto* bar_cmd = app.add_subcommand("barycenter",
                                       "Wasserstein barycenter of N laws");
    auto* bc_specs = bar_cmd->add_option("--specs", bc.specs,
                                         "spec files (N >= 1)");
    auto* bc_weights = bar_cmd->add_option("--weights", bc.weights,
                                           "simplex weights");
    auto* bc_grid = bar_cmd->add_option("--grid", bc.grid,
                                        "quantile grid points");
    auto* bc_out = bar_cmd->add_option("--out", bc.out,
                                       "output prefix (.json/.csv)");
    bar_cmd->add_option("--config", bc.config, "JSON config file");

    CounterexampleCmd cc;
    auto* cex_cmd = app.add_subcommand("counterexample",
                                       "reproduce a grid counterexample case");
    auto* cc_case = cex_cmd->add_option("--case", cc.case_id, "1 or 2");
    auto* cc_grid = cex_cmd->add_option("--grid", cc.grid, "cells per axis");
    auto* cc_eps = cex_cmd->add_option("--epsilon", cc.epsilon,
                                       "final epsilon / domain length^2");
    auto* cc_iters = cex_cmd->add_option("--iters", cc.iters,
                                         "iterations per annealing stage");
    auto* cc_out = cex_cmd->add_option("--out", cc.out, "output prefix");
    cex_cmd->add_option("--config", cc.config, "JSON config file");

    SampleCmd sc;
    auto* smp_cmd = app.add_subcommand("sample", "draw an i.i.d. point cloud");
    auto* sc_spec = smp_cmd->add_option("--spec", sc.spec, "law to sample");
    auto* sc_n = smp_cmd->add_option("--n", sc.n, "number of points");
    auto* sc_seed = smp_cmd->add_option("--seed", sc.seed, "RNG seed");
    auto* sc_out = smp_cmd->add_option("--out", sc.out, "CSV output path");
    smp_cmd->add_option("--config", sc.config, "JSON config file");

    OracleW2Cmd oc;
    auto* orc_cmd = app.add_subcommand("oracle-w2",
                                       "empirical W2 with a bootstrap sigma");
    auto* oc_spec = orc_cmd->add_option("--spec", oc.spec, "first law");
    auto* oc_spec2 = orc_cmd->add_option("--spec2", oc.spec2, "second law");
    auto* oc_n = orc_cmd->add_option("--n", oc.n, "sample size per side");
    auto* oc_seed = orc_cmd->add_option("--seed", oc.seed, "RNG seed");
    auto* oc_out = orc_cmd->add_option("--out", oc.out, "JSON output path");
    orc_cmd->add_option("--config", oc.config, "JSON config file");

    try {
        app.parse(argc, argv);

        if (app.got_subcommand(dist_cmd)) {
            json cfg = load_config(dc.config);
            merge(dc_spec, dc.spec, cfg, "spec");
            merge(dc_spec2, dc.spec2, cfg, "spec2");
            merge(dc_out, dc.out, cfg, "out");
            require_set(!dc.spec.empty(), "--spec");
            require_set(!dc.spec2.empty(), "--spec2");
            return run_distance(dc);
        }
        if (app.got_subcommand(map_cmd)) {
            json cfg = load_config(mc.config);
            merge(mc_spec, mc.spec, cfg, "spec");
            merge(mc_spec2, mc.spec2, cfg, "spec2");
            merge(mc_radii, mc.radii, cfg, "radii");
            merge(mc_n, mc.n, cfg, "grid");
            merge(mc_out, mc.out, cfg, "out");
            require_set(!mc.spec.empty(), "--spec");
            require_set(!mc.spec2.empty(), "--spec2");
            if (mc.n < 2)
                throw radot::InputError("map-eval: --grid must be >= 2");
            return run_map_eval(mc);
        }
        if (app.got_subcommand(int_cmd)) {
            json cfg = load_config(ic.config);
            merge(ic_spec, ic.spec, cfg, "spec");
            merge(ic_spec2, ic.spec2, cfg, "spec2");
            merge(ic_t, ic.ts, cfg, "t");
            merge(ic_grid, ic.grid, cfg, "grid");
            merge(ic_out, ic.out, cfg, "out");
            require_set(!ic.spec.empty(), "--spec");
            require_set(!ic.spec2.empty(), "--spec2");
            return run_interpolate(ic);
        }
        if (app.got_subcommand(bar_cmd)) {
            json cfg = load_config(bc.config);
            merge(bc_specs, bc.specs, cfg, "specs");
            merge(bc_weights, bc.weights, cfg, "weights");
            merge(bc_grid, bc.grid, cfg, "grid");
            merge(bc_out, bc.out, cfg, "out");
            return run_barycenter(bc);
        }
        if (app.got_subcommand(cex_cmd)) {
            json cfg = load_config(cc.config);
            merge(cc_case, cc.case_id, cfg, "case");
            merge(cc_grid, cc.grid, cfg, "grid");
            merge(cc_eps, cc.epsilon, cfg, "epsilon");
            merge(cc_iters, cc.iters, cfg, "iters");
            merge(cc_out, cc.out, cfg, "out");
            return run_counterexample(cc);
        }
        if (app.got_subcommand(smp_cmd)) {
            json cfg = load_config(sc.config);
            merge(sc_spec, sc.spec, cfg, "spec");
            merge(sc_n, sc.n, cfg, "n");
            merge(sc_seed, sc.seed, cfg, "seed");
            merge(sc_out, sc.out, cfg, "out");
            require_set(!sc.spec.empty(), "--spec");
            return run_sample(sc);
        }
        if (app.got_subcommand(orc_cmd)) {
            json cfg = load_config(oc.config);
            merge(oc_spec, oc.spec, cfg, "spec");
            merge(oc_spec2, oc.spec2, cfg, "spec2");
            merge(oc_n, oc.n, cfg, "n");
            merge(oc_seed, oc.seed, cfg, "seed");
            merge(oc_out, oc.out, cfg, "out");
            require_set(!oc.spec.empty(), "--spec");
            require_set(!oc.spec2.empty(), "--spec2");
            return run_oracle_w2(oc);
        }
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const radot::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const radot::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 4;
    } catch (const radot::MathError& e) {
        std::cerr << "math error: " << e.what() << "\n";
        return 3;
    }
}
