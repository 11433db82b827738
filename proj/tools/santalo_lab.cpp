// santalo-lab: run experiment configs and built-in suites.
//   santalo-lab run <config.json> [--jobs N] [--out DIR]
//   santalo-lab suite <name> [--jobs N] [--out DIR]
//   santalo-lab list
// Exit status: 0 no Violated ledger, 2 some Violated ledger, 3 configuration error.

#include "santalo/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace h = santalo::harness;

namespace {

int execute(const h::RunConfig& cfg, int jobs, std::string out, bool quiet) {
    h::RunOptions opt;
    opt.jobs = jobs;
    opt.seed_override = h::seed_from_env();
    if (out.empty()) out = cfg.out_dir.empty() ? "santalo-lab-out/" + cfg.name : cfg.out_dir;
    const auto report = h::run(cfg, opt);
    h::write_outputs(report, out);
    if (!quiet) std::cout << h::summary_table(report);
    std::cout << "outputs: " << out << "\n";
    return h::exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification harness for volume-product and transport-entropy inequalities"};
    app.require_subcommand(1);

    std::string config_path, suite_name, out;
    int jobs = 1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run the experiments of a JSON config");
    run->add_option("config", config_path, "config file")->required();
    auto* suite = app.add_subcommand("suite", "run a built-in suite");
    suite->add_option("name", suite_name, "direct-bs, s-concave, transport, sphere, linearize or all")->required();
    for (auto* sub : {run, suite}) {
        sub->add_option("--jobs,-j", jobs, "experiments run in parallel")->check(CLI::PositiveNumber);
        sub->add_option("--out,-o", out, "output directory");
        sub->add_flag("--quiet,-q", quiet, "omit the summary table");
    }
    auto* list = app.add_subcommand("list", "list experiment kinds and suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (*list) {
            for (const auto& k : h::registry())
                std::cout << k.name << "\t" << k.module << "\t" << (k.randomized ? "seeded" : "fixed") << "\t"
                          << k.description << "\n";
            std::cout << "suites:";
            for (const auto& s : h::suite_names()) std::cout << " " << s;
            std::cout << "\n";
            return 0;
        }
        if (*run) return execute(h::load_config(config_path), jobs, out, quiet);
        return execute(h::suite(suite_name), jobs, out, quiet);
    } catch (const santalo::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const santalo::UnknownSuite& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
