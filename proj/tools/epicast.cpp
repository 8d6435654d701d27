#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "epicast/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"epicast: ordinal hospitalization-trend forecasting pipeline"};
    app.set_version_flag("--version", std::string(epicast::kVersion));

    std::string command;
    app.add_option("command", command, "one of: synth ingest labels prompts train predict eval ablate gsi")
        ->required()
        ->check(CLI::IsMember({"synth", "ingest", "labels", "prompts", "train", "predict", "eval",
                               "ablate", "gsi"}));
    std::string config_path;
    app.add_option("--config", config_path, "path to the JSON run configuration")->required();
    long long seed_override = -1;
    app.add_option("--seed", seed_override, "override the config's primary seed");
    std::string out_override;
    app.add_option("--out", out_override, "override the config's output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // malformed invocation is an input error
    }

    try {
        epicast::LoadedConfig lc = epicast::load_run_config(config_path);
        if (seed_override >= 0) lc.run.seed = static_cast<std::uint64_t>(seed_override);
        if (!out_override.empty()) lc.run.out_dir = out_override;
        epicast::run_command(command, lc);
        return 0;
    } catch (const epicast::Error& e) {
        std::fprintf(stderr, "epicast %s: error: %s\n", command.c_str(), e.what());
        return epicast::is_input_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "epicast %s: error: %s\n", command.c_str(), e.what());
        return 1;
    }
}
