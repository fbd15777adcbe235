#include <CLI11.hpp>

#include <iostream>

#include "safegrid/errors.hpp"
#include "safegrid/experiment.hpp"

namespace {

int g_verbosity = 1;  // 0 error, 1 info, 2 debug

void set_log_level(const std::string& level) {
    if (level == "error") g_verbosity = 0;
    else if (level == "info") g_verbosity = 1;
    else if (level == "debug") g_verbosity = 2;
}

int cmd_validate(const std::string& spec_path) {
    const auto spec = safegrid::load_experiment_spec(spec_path);
    std::cout << safegrid::resolve_spec_json(spec).dump(2) << "\n";
    return 0;
}

int cmd_run(const std::string& spec_path, const std::string& out_override,
            int jobs) {
    auto spec = safegrid::load_experiment_spec(spec_path);
    if (!out_override.empty()) spec.output_dir = out_override;
    return safegrid::run_experiment(spec, jobs, g_verbosity >= 1);
}

int cmd_plotdata(const std::string& log_dir, const std::string& out_override) {
    safegrid::emit_plotdata(log_dir,
                            out_override.empty() ? log_dir : out_override);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe exploration and reward optimization on grid MDPs"};
    app.require_subcommand(1);

    std::string log_level = "info";
    app.add_option("--log-level", log_level, "error, info or debug")
        ->check(CLI::IsMember({"error", "info", "debug"}));

    std::string spec_path, out_dir, log_dir;
    int jobs = 1;

    CLI::App* run = app.add_subcommand("run", "Execute every method x seed cell");
    run->add_option("spec", spec_path, "experiment spec file")->required();
    run->add_option("--out", out_dir, "output directory (overrides the spec)");
    run->add_option("--jobs", jobs, "concurrent run cells")
        ->check(CLI::PositiveNumber);

    CLI::App* validate =
        app.add_subcommand("validate", "Parse and echo the resolved spec");
    validate->add_option("spec", spec_path, "experiment spec file")->required();

    CLI::App* plotdata =
        app.add_subcommand("plotdata", "Emit plot-ready series from run logs");
    plotdata->add_option("dir", log_dir, "directory holding run logs")
        ->required();
    plotdata->add_option("--out", out_dir, "output directory (default: dir)");

    CLI11_PARSE(app, argc, argv);
    set_log_level(log_level);

    try {
        if (run->parsed()) return cmd_run(spec_path, out_dir, jobs);
        if (validate->parsed()) return cmd_validate(spec_path);
        if (plotdata->parsed()) return cmd_plotdata(log_dir, out_dir);
    } catch (const safegrid::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
