#ifndef DOCBIN_PIPELINE_ABLATION_HPP
#define DOCBIN_PIPELINE_ABLATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "docbin/pipeline/corpus.hpp"
#include "docbin/pipeline/inference.hpp"

namespace docbin {

struct TrainedPipeline {
    PreprocessOption option;
    EnhancementBundle enhancement;
    BinarizationBundle binarization;
    TrainingLog log;
};

/// All three stages on one corpus: augmentation, enhancement, then local and
/// global binarization on the enhancement output.
inline TrainedPipeline train_pipeline(const std::vector<LabeledImage>& train, const PreprocessOption& opt,
                                      const StageConfig& cfg, const PatchConfig& patches) {
    cfg.validate();
    PatchConfig pc = patches;
    pc.patch_size = cfg.patch_size;
    const Manifest m = build_manifest(train, pc, cfg.global_size, cfg.seed);
    TrainedPipeline t;
    t.option = opt;
    t.enhancement = train_enhancement(m.patches, opt, cfg, &t.log);
    t.binarization = train_binarization(local_samples(t.enhancement, m.patches, opt, cfg.patch_size), m.globals, cfg,
                                        &t.log);
    return t;
}

struct AblationRow {
    PreprocessOption option;
    MetricsReport mean;
};

/// One short training run per option, scored on the held-out images.
inline std::vector<AblationRow> run_ablation(const std::vector<LabeledImage>& train,
                                             const std::vector<LabeledImage>& test, const std::vector<int>& options,
                                             const StageConfig& cfg, const PatchConfig& patches,
                                             const std::function<void(int option)>& on_option = {}) {
    if (test.empty()) throw Error(ErrorCode::invalid_argument, "run_ablation: no evaluation images");
    std::vector<AblationRow> rows;
    for (int id : options) {
        const PreprocessOption opt = PreprocessOption::from_id(id);
        if (on_option) on_option(id);
        const TrainedPipeline t = train_pipeline(train, opt, cfg, patches);
        const InferenceSizes sizes{cfg.patch_size, cfg.global_size};
        std::vector<NamedReport> reports;
        for (const auto& li : test) {
            reports.push_back({li.name, evaluate_all(infer(li.image, t.enhancement, t.binarization, opt, sizes), li.gt)});
        }
        rows.push_back({opt, mean_report(reports)});
    }
    return rows;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = csv_row({"option", "input", "gt", "fm", "pfm", "psnr", "drd"});
    for (const auto& r : rows) {
        std::vector<std::string> f{std::to_string(r.option.option_id), label(r.option.input_mode),
                                   label(r.option.gt_mode)};
        for (auto& v : metric_fields(r.mean)) f.push_back(std::move(v));
        out += csv_row(f);
    }
    return out;
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_ABLATION_HPP
