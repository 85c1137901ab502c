// Command-line front end: one scenario file in, CSV/JSON (and PGM) out.
//
//   airybeam <command> --config FILE [--out DIR] [--threads N] [--preview] [--oracle]
//
// Exit codes: 0 ok, 2 bad config, 3 numerical failure (validate: a check failed), 4 I/O.

#include <airybeam/io/scenario.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace cli = airybeam::cli;

int main(int argc, char** argv) {
    CLI::App app{"Airy beam diffraction toolkit"};
    std::string command, config_path, out_dir;
    int threads = 1;
    bool preview = false, oracle = false;
    app.add_option("command", command, "field | caustic | pathloss | knife | softheal | pulse | validate | run")
        ->required();
    app.add_option("--config,-c", config_path, "scenario JSON")->required();
    app.add_option("--out,-o", out_dir, "output directory (default: output_dir from the config)");
    app.add_option("--threads,-j", threads, "worker threads, 0 = all cores");
    app.add_flag("--preview", preview, "also write PGM previews");
    app.add_flag("--oracle", oracle, "cross-check against an independent computation");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const cli::json root = cli::read_json_file(config_path);
        int failures = 0;
        for (const auto& sc : cli::expand_sweep(root)) {
            const cli::ScenarioConfig cfg = cli::parse_config_json(sc.config);
            std::string cmd = command;
            if (cmd == "run") {
                if (cfg.command.empty()) throw cli::config_error("config error at 'command': 'run' needs a command in the config");
                cmd = cfg.command;
            }
            cli::RunOptions opts;
            opts.out_dir = out_dir.empty() ? cfg.output_dir : out_dir;
            if (!sc.label.empty()) opts.out_dir = (std::filesystem::path(opts.out_dir) / sc.label).string();
            opts.threads = threads;
            opts.preview = preview;
            opts.oracle = oracle;
            opts.log = &std::cout;
            const cli::RunResult r = cli::run_scenario(cfg, cmd, opts);
            failures += r.failures;
            for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
        }
        return failures ? 3 : 0;
    } catch (const cli::config_error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const cli::io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const airybeam::error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
