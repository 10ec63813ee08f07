// Command-line entry point: run, sweep, check, version.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relent/config.hpp"
#include "relent/errors.hpp"
#include "relent/harness.hpp"

namespace {

constexpr const char* kVersion = "relent 0.1.0";

int report_run(const relent::RunOutcome& out, const std::string& dir) {
    std::cout << "exit=" << out.exit_code << " out=" << dir << "\n";
    if (out.point.run) {
        const auto& L = out.point.run->ledger;
        std::cout << "phi_T=" << L.phi.back() << " phi_max=" << L.phi_max << " gronwall_C=" << out.point.gronwall_C
                  << " entropy_C=" << L.entropy_C << " steps=" << L.steps << "\n";
    }
    if (!out.message.empty()) std::cerr << out.message << "\n";
    return out.exit_code;
}

int report_sweep(const relent::SweepOutcome& out, const std::string& dir) {
    std::cout << "exit=" << out.exit_code << " out=" << dir << "\n";
    const auto& r = out.report;
    for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
        std::cout << "eps=" << r.epsilons[k] << " N=" << r.cells[k] << " phi_T=" << r.phi_T[k]
                  << " phi_sup=" << r.phi_sup[k] << " C=" << r.gronwall_C[k] << " exit=" << r.exit_codes[k] << "\n";
    }
    if (!r.epsilons.empty()) {
        std::cout << "rate(phi_T)=" << r.fit.rate << " rate(phi_sup)=" << r.fit_sup.rate
                  << " uniformity=" << r.uniformity << (r.partial ? " partial" : "") << "\n";
    }
    if (!out.message.empty()) std::cerr << out.message << "\n";
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation-to-diffusion relative-entropy experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;
    std::uint64_t seed = relent::CheckConfig{}.seed;
    int samples = relent::CheckConfig{}.samples;
    bool inject = false;

    auto* run = app.add_subcommand("run", "one paired relaxation/limit run at the first eps");
    run->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory (overrides [output] dir)");

    auto* sweep = app.add_subcommand("sweep", "paired runs over the eps list with a rate fit");
    sweep->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sweep->add_option("--workers", workers, "concurrent eps points (overrides [sweep] workers)")
        ->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "randomized identity and consistency suite");
    check->add_option("--out", out_dir, "directory for check_report.csv");
    check->add_option("--seed", seed, "random seed");
    check->add_option("--samples", samples, "random states per identity")->check(CLI::PositiveNumber);
    check->add_flag("--inject-flux-fault", inject, "flip the sign of the modified entropy flux");

    app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : relent::kExitConfig;
    }

    try {
        if (*run || *sweep) {
            const relent::RunConfig cfg = relent::load_run_config(config_path);
            const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
            if (*run) return report_run(relent::cmd_run(cfg, dir), dir);
            return report_sweep(relent::cmd_sweep(cfg, dir, workers > 0 ? workers : cfg.workers), dir);
        }
        if (*check) {
            relent::CheckConfig cc;
            cc.seed = seed;
            cc.samples = samples;
            cc.inject_flux_fault = inject;
            relent::CheckReport report;
            const int code = relent::cmd_check(cc, out_dir, &report);
            for (const auto& i : report.items) {
                std::cout << (!i.asserted ? "INFO" : i.passed ? "PASS" : "FAIL") << "  " << i.name << " = " << i.value
                          << " (threshold " << i.threshold << ")\n";
            }
            return code;
        }
        std::cout << kVersion << "\n";
        return 0;
    } catch (const relent::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return relent::kExitConfig;
    }
}
