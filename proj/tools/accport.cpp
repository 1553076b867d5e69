// accport: safe sets, controller checks and plot slices for ACC configurations.
// Every flag can also be set through ACCPORT_<FLAG> (e.g. ACCPORT_MAX_ITER).

#include "accport/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <iostream>

int main(int argc, char** argv) {
    using namespace accport;
    CLI::App app{"ACC portability checker"};
    app.require_subcommand(1);

    std::string config, out, sets_dir, safe_set, fix;
    std::optional<int> max_iter, workers;
    std::optional<std::uint64_t> seed;
    std::optional<long> budget;
    int grid = 100;

    auto* rcis = app.add_subcommand("rcis", "compute one safe set per VHC and object class");
    rcis->add_option("--config", config, "run configuration (JSON)")->required()->envname("ACCPORT_CONFIG");
    rcis->add_option("--out", out, "output directory")->required()->envname("ACCPORT_OUT");
    rcis->add_option("--max-iter", max_iter, "iteration cap (default 100)")->envname("ACCPORT_MAX_ITER");
    rcis->add_option("--workers", workers, "worker threads")->envname("ACCPORT_WORKERS");

    auto* check = app.add_subcommand("check", "check the configured controllers against the safe sets");
    check->add_option("--config", config, "run configuration (JSON)")->required()->envname("ACCPORT_CONFIG");
    check->add_option("--safe-sets", sets_dir, "directory written by rcis")->required()->envname("ACCPORT_SAFE_SETS");
    check->add_option("--out", out, "output directory")->required()->envname("ACCPORT_OUT");
    check->add_option("--seed", seed, "sampling seed")->envname("ACCPORT_SEED");
    check->add_option("--budget", budget, "ReLU branch-and-bound leaf budget")->envname("ACCPORT_BUDGET");
    check->add_option("--workers", workers, "worker threads")->envname("ACCPORT_WORKERS");

    auto* sl = app.add_subcommand("slice", "export a slice of a safe set as CSV");
    sl->add_option("--safe-set", safe_set, "safe set file")->required()->envname("ACCPORT_SAFE_SET");
    sl->add_option("--fix", fix, "fixed coordinates, e.g. v_T=20,delay=0")->required()->envname("ACCPORT_FIX");
    sl->add_option("--out", out, "facet CSV; the grid goes next to it as <name>_grid.csv")
        ->required()
        ->envname("ACCPORT_OUT");
    sl->add_option("--grid", grid, "grid points per axis")->envname("ACCPORT_GRID")->check(CLI::Range(2, 100000));

    CLI11_PARSE(app, argc, argv);

    const CommandIo io{std::cout, std::cerr};
    try {
        if (*sl) return cmd_slice(safe_set, fix, out, grid, io);

        RunConfig cfg = load_run_config(config);
        if (max_iter) cfg.max_iter = *max_iter;
        if (workers) cfg.workers = *workers;
        if (seed) cfg.seed = *seed;
        if (budget) cfg.budget = *budget;
        if (cfg.max_iter < 1 || cfg.budget < 1 || cfg.workers < 0) throw ConfigError("caps must be positive");
        if (cfg.workers > 0) omp_set_num_threads(cfg.workers);

        if (*rcis) return cmd_rcis(cfg, out, io);
        return cmd_check(cfg, sets_dir, out, io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
