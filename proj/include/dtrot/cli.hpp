#pragma once

// Subcommand orchestration behind the `dtrot` executable. Argument parsing
// lives in tools/; this header turns a RunConfig into output files, one
// summary line and an exit code.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "bricks.hpp"
#include "certify.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "invariant_sets.hpp"
#include "map_model.hpp"
#include "rotation.hpp"

namespace dtrot {

struct RunConfig {
    std::string subcommand;
    std::string map_path;
    std::string out_dir = ".";
    std::uint64_t rng_seed = 0;
    unsigned threads = 1;

    // rotation / certify
    long long seeds = 1024;
    long long iters = 10000;
    // orbit
    double orbit_x = 0.0;
    double orbit_y = 0.0;
    long long record_every = 1;
    // constants
    std::string mode = "closed_form";
    int resolution = 256;  ///< also the grid resolution in constants grid mode
    // basins
    std::string sign = "lower";
    long long horizon = 1000;
    double y_min = -2.0;
    double y_max = 2.0;
    bool two_sided = false;
    // bricks
    int n0 = 1;
    long m0 = 0;
    double target_diameter = 0.25;
    double min_diameter = 1e-3;
    std::string graph_mode = "certified";
    // certify
    std::string goal = "entropy";
    long p = 0;
    int q = 1;
    double b = 0.0;
    long long samples = 1000000;
    bool one_sided = false;
};

inline constexpr int exit_missing_file = 64;
inline constexpr int exit_bad_input = 65;

namespace detail {

inline std::ofstream open_output(const RunConfig& cfg, const std::string& name, bool binary = false) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
}

inline int run_subcommand(const RunConfig& cfg, const MapSpec& spec, std::ostream& out) {
    const std::string& cmd = cfg.subcommand;
    if (cmd == "constants") {
        ConstantsMode mode;
        if (cfg.mode == "closed_form") mode = ConstantsMode::closed_form;
        else if (cfg.mode == "grid") mode = ConstantsMode::grid;
        else throw ConfigError("unknown constants mode '" + cfg.mode + "'");
        const auto report = compute_constants(spec, mode, cfg.resolution);
        auto f = open_output(cfg, "constants.txt");
        write_constants_table(f, report);
        write_constants_table(out, report);
        return 0;
    }
    if (cmd == "orbit") {
        const auto orbit = iterate_orbit(spec, {cfg.orbit_x, cfg.orbit_y}, cfg.iters, cfg.record_every);
        auto f = open_output(cfg, "orbit.csv");
        write_orbit_csv(f, orbit);
        out << "final_displacement " << fmt_double(orbit.samples.back().displacement) << '\n';
        return 0;
    }
    if (cmd == "rotation") {
        const auto est = estimate_rotation_interval(spec, cfg.seeds, cfg.iters, {cfg.threads});
        auto f = open_output(cfg, "rotation.csv");
        write_rotation_csv(f, est);
        out << "rho_lower " << fmt_double(est.lower) << " rho_upper " << fmt_double(est.upper) << '\n';
        return 0;
    }
    if (cmd == "basins") {
        HalfSign sign;
        if (cfg.sign == "lower") sign = HalfSign::lower;
        else if (cfg.sign == "upper") sign = HalfSign::upper;
        else throw ConfigError("unknown sign '" + cfg.sign + "'");
        const auto mask = compute_basin_mask(spec, sign, cfg.horizon, {cfg.y_min, cfg.y_max}, cfg.resolution,
                                             cfg.resolution, cfg.two_sided, cfg.threads);
        auto pgm = open_output(cfg, "mask.pgm", true);
        write_mask_pgm(pgm, mask);
        if (mask.empty()) {
            out << "cells 0 profile undefined\n";
            return 0;
        }
        const auto prof = compute_height_profile(mask);
        auto csv = open_output(cfg, "profile.csv");
        write_profile_csv(csv, prof);
        const auto c = compute_constants(spec);
        out << "cells " << mask.count() << " oscillation " << fmt_double(prof.oscillation) << " M_f "
            << fmt_double(c.M_f) << " defined_everywhere " << (prof.defined_everywhere ? "true" : "false") << '\n';
        return 0;
    }
    if (cmd == "bricks") {
        GraphMode gm;
        if (cfg.graph_mode == "certified") gm = GraphMode::certified;
        else if (cfg.graph_mode == "sampled") gm = GraphMode::sampled;
        else throw ConfigError("unknown graph mode '" + cfg.graph_mode + "'");
        DecompositionOptions dopt;
        dopt.min_diameter = cfg.min_diameter;
        dopt.threads = cfg.threads;
        const auto dec = build_free_decomposition(spec, cfg.n0, cfg.m0, cfg.target_diameter, dopt);
        const auto graph = build_transition_graph(dec, spec, gm, cfg.threads);
        auto bcsv = open_output(cfg, "bricks.csv");
        write_bricks_csv(bcsv, dec);
        auto ecsv = open_output(cfg, "edges.csv");
        write_edges_csv(ecsv, graph);
        auto cert = open_output(cfg, "chain.txt");
        for (const auto& w : dec.warnings)
            cert << "warning: FixedPointSuspected brick=" << w.brick << " rect=[" << fmt_double(w.location.x0) << ','
                 << fmt_double(w.location.x1) << "]x[" << fmt_double(w.location.y0) << ','
                 << fmt_double(w.location.y1) << "]\n";
        int code = 0;
        std::string chain = "none";
        try {
            const auto res = find_closed_chain(graph, {0, cfg.n0, cfg.m0});
            write_chain_certificate(cert, res);
            if (res.certificate) chain = "found";
        } catch (const InconclusiveError& e) {
            cert << "[chain]\nresult: inconclusive\nreason: " << e.what() << '\n';
            chain = "inconclusive";
            code = 2;
        }
        out << "bricks " << dec.bricks.size() << " N " << dec.N << " k_crit "
            << (graph.k_crit_estimate ? std::to_string(*graph.k_crit_estimate) : std::string("none"))
            << " fixed_point_suspected " << dec.warnings.size() << " chain " << chain << '\n';
        return code;
    }
    if (cmd == "certify") {
        Certificate c;
        if (cfg.goal == "entropy") {
            c = certify_entropy(spec, cfg.seeds, cfg.iters, {cfg.threads});
        } else if (cfg.goal == "bounded") {
            c = test_bounded_displacement(spec, cfg.p, cfg.q, cfg.seeds, cfg.iters, {cfg.one_sided, cfg.threads});
        } else if (cfg.goal == "exactness") {
            c = check_exactness(spec, cfg.b, cfg.samples, cfg.rng_seed, cfg.threads);
        } else if (cfg.goal == "boyland") {
            c = boyland_verdict(spec, {cfg.seeds, cfg.iters, cfg.seeds, cfg.iters, cfg.threads});
        } else {
            throw ConfigError("unknown goal '" + cfg.goal + "'");
        }
        auto f = open_output(cfg, "certificate.txt");
        write_certificate(f, c);
        out << "outcome " << to_string(c.outcome) << " kind " << to_string(c.kind) << '\n';
        return exit_code(c.outcome);
    }
    throw ConfigError("unknown subcommand '" + cmd + "'");
}

}  // namespace detail

/// Exit codes: module convention on success, 64 missing map file,
/// 65 invalid spec or configuration, 1 anything else.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::ifstream in(cfg.map_path);
    if (cfg.map_path.empty() || !in) {
        err << "error: cannot read map file '" << cfg.map_path << "'\n";
        return exit_missing_file;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        const MapSpec spec = parse_map_spec(buf.str());
        return detail::run_subcommand(cfg, spec, out);
    } catch (const SpecError& e) {
        err << "spec error: " << e.what() << '\n';
        return exit_bad_input;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_bad_input;
    } catch (const PreconditionError& e) {
        err << "precondition: " << e.what() << '\n';
        return exit_bad_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace dtrot
