// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <CLI11.hpp>

#include <ostream>

#include "tagdet/cli/commands.hpp"
#include "tagdet/errors.hpp"

namespace tagdet::cli {
namespace {

struct Options {
    std::vector<std::string> configs;
    std::string data, out, split, checkpoint, predictions, output;
    bool resume = false;
    bool dump_config = false;
};

/// Applies files, then aliases, then `--key=value` overrides, in that order.
RunConfig build_config(const Options& o, const std::vector<std::string>& extras) {
    RunConfig cfg;
    for (const std::string& path : o.configs) cfg.load_file(path);
    if (!o.data.empty()) cfg.set("data.dir", o.data);
    if (!o.out.empty()) cfg.set("run.dir", o.out);
    if (!o.split.empty()) cfg.set("eval.split", o.split);
    for (const std::string& arg : extras) {
        if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos)
            throw ConfigError("unexpected argument '" + arg + "'; overrides take the form --key=value");
        const auto eq = arg.find('=');
        cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
    }
    cfg.sync_seeds();
    return cfg;
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal action detection: synthesize data, train, evaluate, infer, ablate."};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->allow_extras();
        sub->add_option("-c,--config", o.configs, "Config file(s) of key = value lines, applied in order");
        sub->add_option("--data", o.data, "Dataset directory (data.dir)");
        sub->add_option("--out", o.out, "Run directory (run.dir)");
        sub->add_flag("--dump-config", o.dump_config, "Print the effective config and exit");
        sub->footer("Any config key can be overridden with --key=value, e.g. --train.lr=2e-4.");
    };
    CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
    CLI::App* train = app.add_subcommand("train", "Train on the train split");
    CLI::App* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint or a predictions file");
    CLI::App* infer = app.add_subcommand("infer", "Write detections for a split");
    CLI::App* ablate = app.add_subcommand("ablate", "Train and evaluate every fusion mode with and without context");
    for (CLI::App* sub : {synth, train, evaluate, infer, ablate}) common(sub);
    train->add_flag("--resume", o.resume, "Continue from the run directory's checkpoint");
    for (CLI::App* sub : {evaluate, infer, ablate}) sub->add_option("--split", o.split, "Split to evaluate (eval.split)");
    for (CLI::App* sub : {evaluate, infer}) sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
    evaluate->add_option("--predictions", o.predictions, "Evaluate this predictions JSON instead of a checkpoint");
    infer->add_option("--output", o.output, "Predictions file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig cfg = build_config(o, sub->remaining());
        if (o.dump_config) {
            out << cfg.to_text();
            return kExitOk;
        }
        if (sub == synth)
            cmd_synth(cfg, out);
        else if (sub == train)
            cmd_train(cfg, o.resume, out);
        else if (sub == evaluate)
            cmd_eval(cfg, optional_path(o.checkpoint), optional_path(o.predictions), out);
        else if (sub == infer)
            cmd_infer(cfg, optional_path(o.checkpoint), optional_path(o.output), out);
        else
            cmd_ablate(cfg, out);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MissingInput& e) {
        err << "error: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const NumericFault& e) {
        err << "numeric fault: " << e.what() << "\n";
        return kExitNumericFault;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace tagdet::cli
