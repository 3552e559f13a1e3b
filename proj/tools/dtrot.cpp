#include <CLI11.hpp>

#include "dtrot/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Rotation theory toolkit for torus maps in the Dehn-twist class"};
    app.require_subcommand(1);
    dtrot::RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--map", cfg.map_path, "map-spec file (key = value lines)")->required();
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--rng-seed", cfg.rng_seed, "seed of the counter-based generator");
        sub->add_option("--threads", cfg.threads, "worker threads (does not change outputs)");
    };

    auto* constants = app.add_subcommand("constants", "constant ledger A_f, B_f and derived bounds");
    common(constants);
    constants->add_option("--mode", cfg.mode, "closed_form | grid");
    constants->add_option("--resolution", cfg.resolution, "grid resolution for --mode grid");

    auto* orbit = app.add_subcommand("orbit", "iterate one cylinder orbit, CSV step,x,y,displacement");
    common(orbit);
    orbit->add_option("--x", cfg.orbit_x);
    orbit->add_option("--y", cfg.orbit_y);
    orbit->add_option("--iters", cfg.iters);
    orbit->add_option("--record-every", cfg.record_every);

    auto* rotation = app.add_subcommand("rotation", "empirical vertical rotation interval");
    common(rotation);
    rotation->add_option("--seeds", cfg.seeds);
    rotation->add_option("--iters", cfg.iters);

    auto* basins = app.add_subcommand("basins", "finite-horizon half-cylinder basins and height profile");
    common(basins);
    basins->add_option("--sign", cfg.sign, "lower | upper");
    basins->add_option("--horizon", cfg.horizon);
    basins->add_option("--resolution", cfg.resolution);
    basins->add_option("--y-min", cfg.y_min);
    basins->add_option("--y-max", cfg.y_max);
    basins->add_flag("--two-sided", cfg.two_sided);

    auto* bricks = app.add_subcommand("bricks", "free brick decomposition, transition graph, closed chains");
    common(bricks);
    bricks->add_option("--n0", cfg.n0);
    bricks->add_option("--m0", cfg.m0);
    bricks->add_option("--target-diameter", cfg.target_diameter);
    bricks->add_option("--min-diameter", cfg.min_diameter);
    bricks->add_option("--graph-mode", cfg.graph_mode, "certified | sampled");

    auto* certify = app.add_subcommand("certify", "entropy / bounded / exactness / boyland certificates");
    common(certify);
    certify->add_option("--goal", cfg.goal, "entropy | bounded | exactness | boyland");
    certify->add_option("--seeds", cfg.seeds);
    certify->add_option("--iters", cfg.iters);
    certify->add_option("--samples", cfg.samples);
    certify->add_option("--p", cfg.p);
    certify->add_option("--q", cfg.q);
    certify->add_option("--b", cfg.b);
    certify->add_flag("--one-sided", cfg.one_sided);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dtrot::exit_bad_input;
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    return dtrot::run(cfg);
}
