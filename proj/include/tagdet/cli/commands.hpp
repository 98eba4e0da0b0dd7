// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tagdet/cli/config.hpp"
#include "tagdet/data/annotations.hpp"
#include "tagdet/eval/map.hpp"

namespace tagdet::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitMissingInput = 2, kExitNumericFault = 3 };

/// Files a run directory holds.
struct RunPaths {
    std::filesystem::path root;
    std::filesystem::path config() const { return root / "config.txt"; }
    std::filesystem::path metrics() const { return root / "metrics.jsonl"; }
    std::filesystem::path checkpoint() const { return root / "checkpoint.tadc"; }
    std::filesystem::path report_json(const std::string& split) const { return root / ("eval_" + split + ".json"); }
    std::filesystem::path report_table(const std::string& split) const { return root / ("eval_" + split + ".txt"); }
    std::filesystem::path predictions(const std::string& split) const {
        return root / ("predictions_" + split + ".json");
    }
};

/// Writes train and val splits under cfg.data_dir.
void cmd_synth(const RunConfig& cfg, std::ostream& out);

struct TrainResult {
    std::filesystem::path checkpoint;
    std::size_t steps = 0;
    double final_loss = 0.0;
};

/// Trains on the "train" split. Appends one JSON object per logged step to
/// metrics.jsonl. With `resume`, continues from the run's checkpoint at its
/// step, discarding log lines past it.
TrainResult cmd_train(const RunConfig& cfg, bool resume, std::ostream& out);

/// Evaluates cfg.split. Detections come from `predictions` when given,
/// otherwise from running the checkpoint (default: the run's checkpoint).
eval::EvalReport cmd_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                          const std::optional<std::filesystem::path>& predictions, std::ostream& out);

/// Writes detections for cfg.split to `output` (default: the run directory).
std::filesystem::path cmd_infer(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                                const std::optional<std::filesystem::path>& output, std::ostream& out);

struct AblationRun {
    std::string name;
    model::FusionMode fusion;
    bool context;
    std::uint64_t init_digest;  // digest of the initial parameters
    double final_loss;
    eval::EvalReport report;
};

struct AblationResult {
    std::vector<AblationRun> runs;  // fusion modes x {context on, off}
    std::string component_table;   // gating x context rows
    std::string fusion_table;      // fusion rows, context on
    std::string matrix_table;      // all runs
};

/// Trains and evaluates every fusion mode with the context branch on and off
/// under the same seed.
AblationResult cmd_ablate(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tagdet::cli
