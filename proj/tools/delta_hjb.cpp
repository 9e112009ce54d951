// Batch driver: one experiment per invocation, CSV artifacts plus manifest.json.

#include "deltahjb/errors.hpp"
#include "deltahjb/experiment.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace {

void configure_logging() {
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("DELTA_HJB_LOG")) {
        const std::string v = env;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else if (v != "info") spdlog::warn("DELTA_HJB_LOG='{}' not recognised; using info", v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Spectral delta-family solver for stochastic control and stopping problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: config 'output')");
        sub->add_option("--threads", threads, "OpenMP threads (default: hardware count)")->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "RNG seed override");
    };
    auto* solve = app.add_subcommand("solve", "solve and write value/strategy surfaces");
    auto* table = app.add_subcommand("table1", "convergence table against the closed-form oracle");
    auto* stop = app.add_subcommand("stopping", "mixed control-stopping solve and exercise boundary");
    auto* sim = app.add_subcommand("simulate", "simulate wealth, variance and strategy paths");
    for (auto* s : {solve, table, stop, sim}) add_common(s);

    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);
    try {
        auto cfg = deltahjb::load_config(config_path);
        if (seed_given) cfg.seed = seed;
        const std::string out = out_dir.empty() ? cfg.output : out_dir;
        spdlog::info("{}: problem {}, output {}", app.get_subcommands().front()->get_name(),
                     deltahjb::to_string(cfg.problem), out);
        if (*solve) return deltahjb::run_solve(cfg, out);
        if (*table) return deltahjb::run_table1(cfg, out);
        if (*stop) return deltahjb::run_stopping(cfg, out);
        if (*sim) return deltahjb::run_simulate(cfg, out);
    } catch (const deltahjb::InputError& e) {
        spdlog::error("invalid input: {}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
