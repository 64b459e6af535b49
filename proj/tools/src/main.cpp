#include "exitlab_app/commands.hpp"
#include "exitlab_app/config.hpp"

#include "exitlab/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
    using namespace exitlab::app;

    CLI::App app{"exitlab: exit events from metastable states"};
    std::string command;
    std::vector<std::string> args;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    unsigned threads = 0;
    int grid = 0;
    RunOptions opt;

    app.add_option("command", command, "subcommand")->required();
    app.add_option("args", args, "subcommand arguments");
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker thread cap (0: all cores)");
    app.add_option("--grid", grid, "grid nodes per axis, overrides the config")->check(CLI::Range(3, 1 << 20));
    app.add_flag("--dump", opt.dump, "qsd: also write u_h and nu_h over the grid");
    app.add_option("--rates", opt.rates_file, "kmc: RateTable JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << usage();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << usage();
        return 2;
    }
    if (!is_command(command)) {
        std::cerr << "unknown command '" << command << "'\n" << usage();
        return 2;
    }
    if (command == "qsd" && !args.empty() && args.front() == "solve") args.erase(args.begin());
    opt.args = args;

    if (out_dir) {
        opt.out_dir = *out_dir;
    } else if (const char* env = std::getenv("EXITLAB_OUT_DIR"); env && *env) {
        opt.out_dir = env;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw SchemaError({"--config: cannot read " + config_path});
            std::stringstream ss;
            ss << is.rdbuf();
            cfg = parse_config(ss.str());
        } else if (command != "validate" && command != "kmc") {
            throw SchemaError({"--config: required by '" + command + "'"});
        }
        if (seed) cfg.seed = *seed;
        if (grid > 0) cfg.grid_nodes = grid;
        exitlab::set_max_threads(threads);
        return dispatch(command, cfg, opt, std::cout);
    } catch (const std::exception& e) {
        std::cerr << error_json(e) << '\n';
        return 1;
    }
}
