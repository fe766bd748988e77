// d1ent: command-line front end for scenario runs.

#include <cstdio>
#include <iostream>
#include <string>
#include <string_view>

#include <CLI11.hpp>

#include "d1ent/runner.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kSolverAbort = 2, kIoError = 3 };

void print_warnings(const d1ent::ScenarioConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

int report_summary(const d1ent::RunSummary& s) {
    for (const auto& f : s.files) std::cerr << "wrote " << f.string() << "\n";
    if (s.aborted_cells > 0) {
        std::cerr << "error: " << s.aborted_cells << " cell(s) aborted; first: " << s.first_error << "\n";
        return kSolverAbort;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::string_view(argv[i]).starts_with("--seedless=")) {
            std::cerr << "error: --seedless takes no value (no random numbers are used)\n";
            return kConfigError;
        }
    }

    CLI::App app{"Two-qubit entanglement dynamics in spin-boson baths"};
    app.require_subcommand(1);
    app.fallthrough();

    std::size_t workers = 0;
    std::string output_dir;
    app.add_option("--workers", workers, "Worker threads (default: config value)")->check(CLI::PositiveNumber);
    app.add_option("--output-dir", output_dir, "Directory for CSV output");
    app.add_flag("--seedless", "Reserved; the computation is deterministic");

    std::string config_path;
    auto* simulate = app.add_subcommand("simulate", "Run the first (alpha, a) cell of a config");
    simulate->add_option("config", config_path, "Config file")->required();
    auto* sweep = app.add_subcommand("sweep", "Run the full sweep and write one CSV per (alpha, method)");
    sweep->add_option("config", config_path, "Config file")->required();
    auto* oracle = app.add_subcommand("oracle-check", "Compare against exact dynamics on a small bath");
    oracle->add_option("config", config_path, "Config file")->required();
    auto* presets = app.add_subcommand("presets", "List or print the built-in configs");
    presets->require_subcommand(1);
    presets->add_subcommand("list", "List preset names");
    std::string preset_name;
    auto* emit = presets->add_subcommand("emit", "Print a preset config");
    emit->add_option("name", preset_name, "Preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    if (presets->parsed()) {
        if (emit->parsed()) {
            const auto& table = d1ent::presets();
            const auto it = table.find(preset_name);
            if (it == table.end()) {
                std::cerr << "error: unknown preset '" << preset_name << "'\n";
                return kConfigError;
            }
            std::cout << it->second;
        } else {
            for (const auto& [name, text] : d1ent::presets()) std::cout << name << "\n";
        }
        return kOk;
    }

    try {
        auto cfg = d1ent::load_config(config_path);
        print_warnings(cfg);
        const std::size_t nw = workers > 0 ? workers : cfg.workers;

        if (sweep->parsed()) {
            return report_summary(d1ent::run_scenario(cfg, output_dir.empty() ? "." : output_dir, nw));
        }
        if (simulate->parsed()) {
            cfg.alphas.resize(1);
            cfg.a_values.resize(1);
            if (!output_dir.empty()) return report_summary(d1ent::run_scenario(cfg, output_dir, nw));
            int rc = kOk;
            for (const auto& res : d1ent::compute_scenario(cfg, nw)) {
                std::cout << "# alpha=" << res.alpha << " method=" << d1ent::to_string(res.method) << "\n"
                          << d1ent::format_csv(res);
                if (res.aborted_cells > 0) {
                    std::cerr << "error: " << res.first_error << "\n";
                    rc = kSolverAbort;
                }
            }
            return rc;
        }
        const auto chk = d1ent::oracle_check(cfg);
        std::cout << d1ent::format_oracle_csv(chk);
        std::fprintf(stderr, "max |C_exact - C_D1| = %.3e\nmax |C_exact_rwa - C_RWA| = %.3e\ntruncation ladder change = %.3e\n",
                     chk.max_d1_deviation, chk.max_rwa_deviation, chk.max_ladder_change);
        return kOk;
    } catch (const d1ent::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const d1ent::SolverError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kSolverAbort;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
}
