#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qtsp/bench.hpp"

namespace {

qtsp::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return qtsp::ExperimentConfig::from_json(ss.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TSP variational optimization benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int workers = -1;
    bool paper_scale = false;
    bool seed_set = false, out_set = false;

    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "root seed");
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_flag("--paper-scale", paper_scale, "use the full benchmark protocol scale");

    const char* modes[] = {"gen-instances", "solve-exact", "run-vqe",         "sweep-depth",
                           "run-dnc",       "report",      "mitigation-study"};
    for (const char* m : modes) app.add_subcommand(m)->fallthrough();

    // Per-mode convenience overrides.
    std::string solve_input, dnc_fixture, report_input;
    app.get_subcommand("solve-exact")->add_option("--input", solve_input, "instance fixture");
    app.get_subcommand("run-dnc")->add_option("--fixture", dnc_fixture, "instance fixture");
    app.get_subcommand("report")
        ->add_option("--input", report_input, "input artifact (repeatable via config)");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;
    out_set = out_opt->count() > 0;

    try {
        qtsp::ExperimentConfig cfg = load_config(config_path);
        cfg.mode = app.get_subcommands().front()->get_name();
        if (seed_set) cfg.seed = seed;
        if (out_set) cfg.out_dir = out_dir;
        if (workers >= 0) cfg.workers = workers;
        if (paper_scale) cfg.paper_scale = true;
        if (!solve_input.empty()) cfg.solve.input = solve_input;
        if (!dnc_fixture.empty()) cfg.dnc.fixture = dnc_fixture;
        if (!report_input.empty()) cfg.report.inputs.push_back(report_input);

        return qtsp::run_command(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
