// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tagdet/data/synthetic.hpp"
#include "tagdet/eval/postprocess.hpp"
#include "tagdet/model/detector.hpp"
#include "tagdet/train/targets.hpp"
#include "tagdet/train/trainer.hpp"

namespace tagdet::cli {

/// Every knob of a run. Serialized as flat `key = value` lines; see
/// RunConfig::keys() for the namespace.
struct RunConfig {
    std::uint64_t seed = 0;

    data::SynthConfig synth;  // synth.seed and id_prefix are set per split
    std::size_t synth_val_videos = 10;

    model::ModelConfig model;  // input_dim / num_classes of 0 mean "from the dataset"
    train::LossConfig loss;
    train::TrainConfig train;  // train.seed mirrors `seed`
    std::size_t log_every = 1;
    std::size_t checkpoint_every = 0;  // 0: only at the end

    eval::InferenceConfig infer;
    unsigned threads = 0;  // evaluation workers, 0 for hardware concurrency

    std::string thresholds = "0.3:0.1:0.7";
    std::string split = "val";
    std::string data_dir = "data";
    std::string run_dir = "run";

    RunConfig();

    /// Sets one key from its text form. Unknown keys and unparseable values throw ConfigError.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;
    static std::vector<std::string> keys();
    static std::string help(std::string_view key);

    /// Applies `key = value` lines; '#' starts a comment.
    void apply_text(std::string_view text, std::string_view source = "config");
    void load_file(const std::string& path);
    /// All keys in registry order; apply_text(to_text()) reproduces the config.
    std::string to_text() const;

    /// Cross-field checks beyond the per-key parsers. Throws ConfigError.
    void validate() const;
    /// Seeds the train schedule and synth generator from `seed`.
    void sync_seeds();
};

}  // namespace tagdet::cli
