#include <optional>
#include <string>

#include "CLI11.hpp"

#include "riskgraph/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"riskgraph: sparse road accident risk forecasting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    const struct {
        const char* name;
        const char* help;
    } commands[] = {
        {"ingest", "build the daily risk tensor from accident records"},
        {"synth", "generate a synthetic graph and risk tensor"},
        {"train", "train a forecasting model and write a checkpoint"},
        {"evaluate", "score checkpoints and the historical-average baseline"},
        {"predict", "forecast future risk from a checkpoint"},
    };
    for (const auto& cmd : commands) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides paths.out_dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const std::optional<std::string> out_override =
        out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir);
    return riskgraph::cli::run_command(name, config_path, out_override);
}
