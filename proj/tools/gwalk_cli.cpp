// command-line front end: run scenario configs, list the bundled catalog,
// print default parameters
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "gwalk/scenario.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + p.string());
}

// a config argument is either a file on disk or a bundled scenario name
std::string load_config_text(const std::string& arg) {
    if (fs::exists(arg)) {
        std::ifstream in(arg, std::ios::binary);
        if (!in) throw gwalk::ConfigError("cannot read " + arg);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
    if (const gwalk::BundledScenario* b = gwalk::find_bundled_scenario(arg))
        return b->ini;
    throw gwalk::ConfigError("no such config file or bundled scenario: '" +
                             arg + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "estimators and consistency checks for transient random walks:\n"
        "Green metrics, asymptotic entropy, rates of escape"};
    app.require_subcommand(1);

    std::string run_config, out_dir, list_filter, defaults_name;
    uint64_t seed = 0, budget_atoms = 0, budget_steps = 0;
    int threads = 0;

    CLI::App* run = app.add_subcommand(
        "run", "run a scenario config (a file path or a bundled name)");
    run->add_option("config", run_config, "config file or bundled scenario")
        ->required();
    CLI::Option* opt_seed =
        run->add_option("--seed", seed, "override the scenario seed");
    CLI::Option* opt_out = run->add_option(
        "--out", out_dir, "output directory (default artifacts/<name>)");
    CLI::Option* opt_threads = run->add_option(
        "--threads", threads,
        "worker threads; results are independent of this by design");
    CLI::Option* opt_ba = run->add_option("--budget-atoms", budget_atoms,
                                          "cap on measure support size");
    CLI::Option* opt_bs = run->add_option(
        "--budget-steps", budget_steps,
        "cap on total sampled walk steps; exceeding it is inconclusive");

    CLI::App* list =
        app.add_subcommand("list", "list bundled scenarios (optional filter)");
    list->add_option("filter", list_filter,
                     "substring to match against scenario names");

    CLI::App* defaults = app.add_subcommand(
        "show-defaults",
        "print the default config template, or a bundled scenario's config");
    defaults->add_option("name", defaults_name, "bundled scenario name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return gwalk::kExitParseError;
    }

    if (list->parsed()) {
        for (const auto& b : gwalk::bundled_scenarios())
            if (b.name.find(list_filter) != std::string::npos)
                std::cout << b.name << " - " << b.description << "\n";
        return gwalk::kExitPass;
    }

    if (defaults->parsed()) {
        if (defaults_name.empty()) {
            std::cout << gwalk::default_config_text();
            return gwalk::kExitPass;
        }
        if (const auto* b = gwalk::find_bundled_scenario(defaults_name)) {
            std::cout << b->ini;
            return gwalk::kExitPass;
        }
        std::cerr << "no bundled scenario named '" << defaults_name << "'\n";
        return gwalk::kExitParseError;
    }

    // run
    gwalk::ScenarioConfig cfg;
    try {
        cfg = gwalk::parse_scenario_config(load_config_text(run_config));
    } catch (const gwalk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return gwalk::kExitParseError;
    }
    if (*opt_seed) cfg.seed = seed;
    if (*opt_threads) cfg.threads = threads;
    if (*opt_ba) cfg.budget_atoms = budget_atoms;
    if (*opt_bs) cfg.budget_steps = budget_steps;
    if (*opt_out) cfg.out_dir = out_dir;
    if (cfg.threads < 1) {
        std::cerr << "config error: threads must be >= 1\n";
        return gwalk::kExitParseError;
    }

    try {
        gwalk::ScenarioArtifacts art = gwalk::run_scenario(cfg);
        fs::path dir = cfg.out_dir.empty()
                           ? fs::path("artifacts") / cfg.name
                           : fs::path(cfg.out_dir);
        fs::create_directories(dir);
        write_file(dir / "report.json", art.report_json);
        write_file(dir / "ladders.csv", art.ladders_csv);
        write_file(dir / "summary.txt", art.summary_txt);
        std::cout << art.summary_txt;
        std::cout << "\nartifacts: " << (dir / "report.json").string() << ", "
                  << (dir / "ladders.csv").string() << ", "
                  << (dir / "summary.txt").string() << "\n";
        return art.exit_code;
    } catch (const gwalk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return gwalk::kExitParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gwalk::kExitParseError;
    }
}
