// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tagdet/data/dataset.hpp"
#include "tagdet/data/synthetic.hpp"
#include "tagdet/errors.hpp"
#include "tagdet/eval/report.hpp"
#include "tagdet/io/binary.hpp"
#include "tagdet/log.hpp"
#include "tagdet/pipeline.hpp"
#include "tagdet/train/checkpoint.hpp"

namespace tagdet::cli {
namespace {

using nlohmann::json;

/// Resolves dataset-dependent model sizes against the manifest.
RunConfig bind_dataset(RunConfig cfg, const data::Manifest& m) {
    auto& in = cfg.model.pyramid.input_dim;
    auto& classes = cfg.model.head.num_classes;
    if (in == 0) in = m.feature_dim;
    if (classes == 0) classes = m.num_classes;
    if (in != m.feature_dim)
        throw ConfigError("model.input_dim is " + std::to_string(in) + " but the dataset has D=" +
                          std::to_string(m.feature_dim));
    if (classes != m.num_classes)
        throw ConfigError("class-count mismatch: model has " + std::to_string(classes) +
                          " classes, dataset has " + std::to_string(m.num_classes));
    return cfg;
}

std::string format_metrics(const train::StepRecord& r) {
    json j = {{"step", r.step},       {"epoch", r.epoch}, {"lr", r.lr},         {"loss", r.loss},
              {"cls_pos", r.cls_pos}, {"reg", r.reg},     {"cls_neg", r.cls_neg}, {"positives", r.positives}};
    return j.dump();
}

/// Keeps the log lines of steps before `step`.
void truncate_metrics(const std::filesystem::path& path, std::size_t step) {
    std::ifstream in(path);
    if (!in) return;
    std::string kept, line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("step")) continue;
        if (j["step"].get<std::size_t>() < step) kept += line + "\n";
    }
    in.close();
    io::write_text_atomic(path, kept);
}

/// Model configuration recorded in a checkpoint, merged with the current
/// non-model settings.
RunConfig config_for_checkpoint(const RunConfig& cfg, const train::Checkpoint& ckpt) {
    RunConfig stored;
    stored.apply_text(ckpt.config, "checkpoint config");
    RunConfig merged = cfg;
    merged.model = stored.model;
    return merged;
}

model::Detector load_detector(const RunConfig& cfg, const std::filesystem::path& path, const data::Manifest& m,
                              RunConfig& bound) {
    if (!std::filesystem::exists(path)) throw MissingInput("checkpoint not found: " + path.string());
    const train::Checkpoint ckpt = train::load_checkpoint(path);
    bound = bind_dataset(config_for_checkpoint(cfg, ckpt), m);
    model::Detector det(bound.model, bound.seed);
    train::restore_parameters(det.parameters(), ckpt);
    return det;
}

std::vector<std::pair<std::string, eval::EvalReport>> rows_of(const std::vector<const AblationRun*>& runs,
                                                              const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, eval::EvalReport>> rows;
    for (std::size_t i = 0; i < runs.size(); ++i) rows.emplace_back(names[i], runs[i]->report);
    return rows;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    data::SynthConfig train_cfg = cfg.synth;
    train_cfg.seed = cfg.seed;
    train_cfg.id_prefix = "train";
    data::SynthConfig val_cfg = train_cfg;
    val_cfg.id_prefix = "val";
    val_cfg.num_videos = cfg.synth_val_videos;

    std::map<std::string, data::Split> splits;
    auto add = [&](const std::string& name, const data::SynthConfig& sc) {
        data::SyntheticSplit s = data::generate_synthetic(sc);
        splits[name] = {std::move(s.features), std::move(s.annotations)};
    };
    add("train", train_cfg);
    if (cfg.synth_val_videos > 0) add("val", val_cfg);
    data::write_dataset(cfg.data_dir, splits);

    for (const auto& [name, split] : splits) {
        std::size_t segments = 0;
        for (const auto& v : split.annotations.videos) segments += v.segments.size();
        out << "split " << name << ": " << split.features.size() << " videos, " << segments << " segments\n";
    }
    out << "wrote " << cfg.data_dir << " (T=" << cfg.synth.length << ", D=" << cfg.synth.dim
        << ", C=" << cfg.synth.classes << ")\n";
}

TrainResult cmd_train(const RunConfig& cfg_in, bool resume, std::ostream& out) {
    cfg_in.validate();
    const data::Manifest manifest = data::load_manifest(cfg_in.data_dir);
    const RunConfig cfg = bind_dataset(cfg_in, manifest);
    const data::Split split = data::load_split(cfg.data_dir, "train");
    const RunPaths paths{cfg.run_dir};
    std::filesystem::create_directories(paths.root);

    model::Detector det(cfg.model, cfg.seed);
    train::Trainer trainer(det, cfg.train, cfg.loss, make_train_samples(split));
    const std::string config_text = cfg.to_text();

    if (resume) {
        if (!std::filesystem::exists(paths.checkpoint()))
            throw MissingInput("cannot resume: no checkpoint at " + paths.checkpoint().string());
        const train::Checkpoint ckpt = train::load_checkpoint(paths.checkpoint());
        train::restore_parameters(det.parameters(), ckpt);
        train::restore_optimizer(trainer.optimizer(), ckpt);
        trainer.seek(ckpt.step);
        truncate_metrics(paths.metrics(), ckpt.step);
        log::info("resuming at step " + std::to_string(ckpt.step));
    } else {
        io::write_text_atomic(paths.metrics(), "");
    }
    io::write_text_atomic(paths.config(), config_text);

    std::ofstream metrics(paths.metrics(), std::ios::app);
    if (!metrics) throw std::runtime_error("cannot write " + paths.metrics().string());
    auto save = [&] {
        train::save_checkpoint(paths.checkpoint(),
                               train::capture(det.parameters(), &trainer.optimizer(), config_text, trainer.step()));
    };

    TrainResult result;
    result.checkpoint = paths.checkpoint();
    while (!trainer.done()) {
        train::StepRecord rec;
        try {
            rec = trainer.train_step();
        } catch (const NumericFault& e) {
            throw NumericFault("step " + std::to_string(trainer.step()) + ": " + e.what());
        }
        result.final_loss = rec.loss;
        if (rec.step % cfg.log_every == 0 || trainer.done()) metrics << format_metrics(rec) << '\n' << std::flush;
        if (cfg.checkpoint_every > 0 && trainer.step() % cfg.checkpoint_every == 0 && !trainer.done()) save();
    }
    save();
    result.steps = trainer.step();
    out << "trained " << result.steps << " steps, final loss " << result.final_loss << "\n"
        << "checkpoint " << result.checkpoint.string() << "\n";
    return result;
}

eval::EvalReport cmd_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                          const std::optional<std::filesystem::path>& predictions, std::ostream& out) {
    cfg.validate();
    const std::vector<double> thresholds = eval::parse_thresholds(cfg.thresholds);
    const RunPaths paths{cfg.run_dir};

    std::vector<data::VideoPredictions> preds;
    data::AnnotationSet annotations;
    if (predictions) {
        if (!std::filesystem::exists(*predictions))
            throw MissingInput("predictions not found: " + predictions->string());
        preds = data::load_predictions(*predictions);
        const data::Manifest m = data::load_manifest(cfg.data_dir);
        const auto it = m.splits.find(cfg.split);
        if (it == m.splits.end()) throw ConfigError("dataset has no split '" + cfg.split + "'");
        annotations = data::load_annotations(std::filesystem::path(cfg.data_dir) / it->second.annotations);
    } else {
        const data::Manifest m = data::load_manifest(cfg.data_dir);
        RunConfig bound;
        model::Detector det = load_detector(cfg, checkpoint.value_or(paths.checkpoint()), m, bound);
        const data::Split split = data::load_split(cfg.data_dir, cfg.split);
        preds = run_inference(det, split.features, cfg.infer, cfg.threads);
        annotations = split.annotations;
    }

    const eval::EvalReport report = evaluate(preds, annotations, thresholds);
    const std::string table = eval::format_table({{cfg.split, report}}, "Setup");
    std::filesystem::create_directories(paths.root);
    io::write_text_atomic(paths.report_json(cfg.split), eval::report_to_json(report).dump(2) + "\n");
    io::write_text_atomic(paths.report_table(cfg.split), table);
    out << table;
    return report;
}

std::filesystem::path cmd_infer(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                                const std::optional<std::filesystem::path>& output, std::ostream& out) {
    cfg.validate();
    const RunPaths paths{cfg.run_dir};
    const data::Manifest m = data::load_manifest(cfg.data_dir);
    RunConfig bound;
    model::Detector det = load_detector(cfg, checkpoint.value_or(paths.checkpoint()), m, bound);
    const data::Split split = data::load_split(cfg.data_dir, cfg.split);
    const auto preds = run_inference(det, split.features, cfg.infer, cfg.threads);
    const std::filesystem::path dest = output.value_or(paths.predictions(cfg.split));
    data::save_predictions(dest, preds);
    std::size_t n = 0;
    for (const auto& v : preds) n += v.detections.size();
    out << "wrote " << n << " detections for " << preds.size() << " videos to " << dest.string() << "\n";
    return dest;
}

AblationResult cmd_ablate(const RunConfig& cfg_in, std::ostream& out) {
    cfg_in.validate();
    const std::vector<double> thresholds = eval::parse_thresholds(cfg_in.thresholds);
    const data::Manifest manifest = data::load_manifest(cfg_in.data_dir);
    const RunConfig base = bind_dataset(cfg_in, manifest);
    const data::Split train_split = data::load_split(base.data_dir, "train");
    const data::Split eval_split = data::load_split(base.data_dir, base.split);
    const auto samples = make_train_samples(train_split);

    using model::FusionMode;
    const FusionMode modes[] = {FusionMode::Baseline, FusionMode::Average, FusionMode::Maximum, FusionMode::Gating};
    AblationResult result;
    for (bool context : {false, true}) {
        for (FusionMode mode : modes) {
            RunConfig cfg = base;
            cfg.model.pyramid.tag.fusion = mode;
            cfg.model.pyramid.tag.use_gating = true;
            cfg.model.pyramid.tag.use_context = context;
            AblationRun run;
            run.name = std::string(model::to_string(mode)) + (context ? ", context" : ", no context");
            run.fusion = mode;
            run.context = context;
            log::info("ablate: training " + run.name);

            model::Detector det(cfg.model, cfg.seed);
            run.init_digest = model::parameter_digest(det.parameters());
            train::Trainer trainer(det, cfg.train, cfg.loss, samples);
            run.final_loss = 0.0;
            while (!trainer.done()) run.final_loss = trainer.train_step().loss;
            const auto preds = run_inference(det, eval_split.features, cfg.infer, cfg.threads);
            run.report = evaluate(preds, eval_split.annotations, thresholds);
            result.runs.push_back(std::move(run));
        }
    }

    auto find = [&](FusionMode mode, bool context) -> const AblationRun* {
        for (const AblationRun& r : result.runs)
            if (r.fusion == mode && r.context == context) return &r;
        return nullptr;
    };
    result.component_table = eval::format_table(
        rows_of({find(FusionMode::Baseline, false), find(FusionMode::Gating, false), find(FusionMode::Baseline, true),
                 find(FusionMode::Gating, true)},
                {"without gating, without context", "with gating, without context", "without gating, with context",
                 "with gating, with context"}),
        "Setup");
    result.fusion_table = eval::format_table(
        rows_of({find(FusionMode::Baseline, true), find(FusionMode::Average, true), find(FusionMode::Maximum, true),
                 find(FusionMode::Gating, true)},
                {"Baseline", "Average", "Maximum", "Gating"}),
        "Setup");
    std::vector<const AblationRun*> all;
    std::vector<std::string> names;
    for (const AblationRun& r : result.runs) {
        all.push_back(&r);
        names.push_back(r.name);
    }
    result.matrix_table = eval::format_table(rows_of(all, names), "Setup");

    const std::string text = "Components (split " + base.split + ")\n" + result.component_table +
                             "\nFusion strategies, context on (split " + base.split + ")\n" + result.fusion_table +
                             "\nAll runs\n" + result.matrix_table;
    json runs = json::array();
    for (const AblationRun& r : result.runs) {
        char digest[32];
        std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.init_digest));
        runs.push_back({{"fusion", model::to_string(r.fusion)},
                        {"context", r.context},
                        {"init_digest", digest},
                        {"final_loss", r.final_loss},
                        {"report", eval::report_to_json(r.report)}});
    }
    const RunPaths paths{base.run_dir};
    std::filesystem::create_directories(paths.root);
    io::write_text_atomic(paths.root / "ablation.txt", text);
    io::write_text_atomic(paths.root / "ablation.json",
                          json({{"split", base.split}, {"seed", base.seed}, {"runs", runs}}).dump(2) + "\n");
    out << text;
    return result;
}

}  // namespace tagdet::cli
