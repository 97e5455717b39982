// Command-line frontend: one subcommand per pipeline stage, a JSON run
// configuration, and a handful of flags that override configured values.
// Exit codes: 0 success, 2 usage/configuration errors, 1 estimation errors.

#include <cstdint>
#include <iostream>
#include <string>

#include "causalkit/runner.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Order-delay causal analysis: ingest, graph discovery, effect estimation,"
                 " effect curves, assignment policies, and synthetic data generation."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string algo;
    std::string treatment;
    std::uint64_t seed = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"ingest", "load, clean, and summarize the configured data"},
        {"dag", "learn a causal graph (hc, tabu, or pc)"},
        {"ate", "estimate average treatment effects"},
        {"cate", "estimate effect curves along a covariate"},
        {"policy", "fit depth-2 treatment assignment trees"},
        {"simulate", "generate synthetic data with a ground-truth oracle"},
    };
    for (const auto& [name, description] : commands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--out", out_dir, "override the configured output directory");
        sub->add_option("--treatment", treatment, "analyze a single treatment");
        if (std::string(name) == "dag") {
            sub->add_option("--algo", algo, "structure-learning algorithm")
                ->check(CLI::IsMember({"hc", "tabu", "pc"}));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        causalkit::RunConfig config = causalkit::load_run_config(config_path);
        if (sub->count("--seed") > 0) config.seed = seed;
        if (sub->count("--out") > 0) config.out_dir = out_dir;
        if (sub->count("--treatment") > 0) config.treatments = {treatment};
        if (sub->get_name() == "dag" && sub->count("--algo") > 0) {
            config.structure.algorithm = algo;
        }
        causalkit::run_command(sub->get_name(), config);
        return 0;
    } catch (const causalkit::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
