#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "docbin/docbin.hpp"

namespace fs = std::filesystem;
using namespace docbin;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kMismatch = 4 };

int exit_code(const Error& e) {
    if (e.is_mismatch()) return kMismatch;
    if (e.code() == ErrorCode::invalid_argument) return kUsage;
    return kIo;
}

/// Default output location when --out is omitted.
fs::path default_out(const std::string& command) {
    const char* root = std::getenv("DOCBIN_OUT_ROOT");
    return fs::path(root && *root ? root : "runs") / command;
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::unwritable_path, dir.string());
}

/// Writes the effective flags of a command before it does any work.
void write_config(const fs::path& path, const std::string& command, const ConfigMap& extra) {
    ConfigMap m;
    m.set("command", command);
    for (const auto& [k, v] : extra.entries()) m.set(k, v);
    write_text(path, m.text());
}

fs::path corpus_images(const fs::path& in) { return fs::is_directory(in / "images") ? in / "images" : in; }

std::vector<fs::path> netpbm_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& [stem, path] : images_by_stem(dir)) out.push_back(path);
    return out;
}

struct TrainFlags {
    StageConfig stage;
    int option = 3;
    std::string penalty_mode = "reverse_over_reverse";

    void add(CLI::App* app, int StageConfig::*epochs, const char* epochs_help) {
        app->add_option("--option", option, "preprocessing option id")->check(CLI::Range(1, PreprocessOption::kCount));
        app->add_option("--epochs", stage.*epochs, epochs_help)->check(CLI::PositiveNumber);
        app->add_option("--batch", stage.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
        app->add_option("--lr", stage.adam.lr, "Adam learning rate")->check(CLI::PositiveNumber);
        app->add_option("--beta1", stage.adam.beta1, "Adam beta1")->check(CLI::Range(0.0, 1.0));
        app->add_option("--beta2", stage.adam.beta2, "Adam beta2")->check(CLI::Range(0.0, 1.0));
        app->add_option("--alpha", stage.loss.alpha, "gradient-penalty coefficient")->check(CLI::PositiveNumber);
        app->add_option("--lambda", stage.loss.lambda, "BCE weight in the generator loss")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--penalty-mode", penalty_mode, "reverse_over_reverse or finite_difference")
            ->check(CLI::IsMember({"reverse_over_reverse", "finite_difference"}));
        app->add_option("--seed", stage.seed, "training seed");
    }

    StageConfig resolved() const {
        StageConfig s = stage;
        s.loss.penalty_mode = parse_penalty_mode(penalty_mode);
        return s;
    }
};

struct AugmentFlags {
    std::vector<double> scales = {0.75, 1.0, 1.25, 1.5};
    std::vector<int> rotations = {0, 90, 180, 270};
    int patch_size = 224;
    int global_size = 512;

    void add(CLI::App* app) {
        app->add_option("--scales", scales, "patch scales")->delimiter(',')->check(CLI::PositiveNumber);
        app->add_option("--rotations", rotations, "patch rotations in degrees")
            ->delimiter(',')
            ->check(CLI::IsMember({0, 90, 180, 270}));
        app->add_option("--patch-size", patch_size, "patch side in pixels")->check(CLI::PositiveNumber);
        app->add_option("--global-size", global_size, "global view side in pixels")->check(CLI::PositiveNumber);
    }

    PatchConfig patches() const {
        PatchConfig p;
        p.scales = scales;
        p.rotations = rotations;
        p.patch_size = patch_size;
        return p;
    }
};

void print_losses(const LossRecord& r) {
    std::cerr << r.stage << " " << r.network << " epoch " << r.epoch << ": d=" << format_fixed(r.d_loss, 6)
              << " g=" << format_fixed(r.g_loss, 6) << " bce=" << format_fixed(r.bce, 6) << "\n";
}

// ---- subcommands ----

struct Synth {
    int count = 4;
    std::uint64_t seed = 1;
    fs::path out;
    SynthSpec spec = SynthSpec::hard(1);

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("synth", "Write a synthetic degraded corpus");
        app->add_option("--count", count, "number of documents")->check(CLI::NonNegativeNumber);
        app->add_option("--seed", seed, "corpus seed");
        app->add_option("--out", out, "corpus directory (default $DOCBIN_OUT_ROOT/synth)");
        app->add_option("--width", spec.width, "page width")->check(CLI::PositiveNumber);
        app->add_option("--height", spec.height, "page height")->check(CLI::PositiveNumber);
        app->add_option("--glyph-height", spec.glyph_height, "glyph height in pixels")->check(CLI::Range(3, 1 << 20));
        app->add_option("--density", spec.stroke_density, "glyph probability per cell")->check(CLI::Range(0.0, 1.0));
        app->add_option("--gradient", spec.gradient_amplitude, "background gradient amplitude")
            ->check(CLI::Range(0.0, 1.0));
        app->add_option("--stains", spec.stain_count, "stain count")->check(CLI::NonNegativeNumber);
        app->add_option("--stain-opacity", spec.stain_opacity, "stain opacity")->check(CLI::Range(0.0, 1.0));
        app->add_option("--bleed", spec.bleed_opacity, "bleed-through opacity")->check(CLI::Range(0.0, 1.0));
        app->add_option("--noise", spec.noise_sigma, "pixel noise sigma")->check(CLI::NonNegativeNumber);
        app->callback([this] { run(); });
    }

    void run() {
        if (out.empty()) out = default_out("synth");
        make_dir(out / "images");
        make_dir(out / "gt");
        ConfigMap c;
        c.set("count", std::to_string(count));
        c.set("seed", std::to_string(seed));
        c.set("width", std::to_string(spec.width));
        c.set("height", std::to_string(spec.height));
        c.set("glyph_height", std::to_string(spec.glyph_height));
        c.set("density", detail::format_real(spec.stroke_density));
        c.set("gradient", detail::format_real(spec.gradient_amplitude));
        c.set("stains", std::to_string(spec.stain_count));
        c.set("stain_opacity", detail::format_real(spec.stain_opacity));
        c.set("bleed", detail::format_real(spec.bleed_opacity));
        c.set("noise", detail::format_real(spec.noise_sigma));
        write_config(out / "config.txt", "synth", c);
        spec.validate();

        std::string listing = csv_row({"name", "seed"});
        for (int i = 0; i < count; ++i) {
            SynthSpec s = spec;
            s.seed = derive_seed(seed, "doc" + std::to_string(i));
            const SynthDocument d = synth_document(s);
            const std::string name = "doc" + std::to_string(i);
            save_corpus_entry(out, {name, d.degraded, d.gt});
            listing += csv_row({name, std::to_string(s.seed)});
        }
        write_text(out / "corpus.csv", listing);
    }
};

struct Preprocess {
    fs::path in, out;
    std::uint64_t seed = 1;
    AugmentFlags aug;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("preprocess", "Augment a corpus into a patch manifest");
        app->add_option("--in", in, "corpus directory with images/ and gt/")->required();
        app->add_option("--out", out, "manifest directory (default $DOCBIN_OUT_ROOT/preprocess)");
        app->add_option("--seed", seed, "seed recorded in the manifest");
        aug.add(app);
        app->callback([this] { run(); });
    }

    void run() {
        if (out.empty()) out = default_out("preprocess");
        make_dir(out);
        ConfigMap c;
        c.set("in", in.string());
        c.set("seed", std::to_string(seed));
        c.set("scales", join_reals(aug.scales));
        c.set("rotations", join_ints(aug.rotations));
        c.set("patch_size", std::to_string(aug.patch_size));
        c.set("global_size", std::to_string(aug.global_size));
        write_config(out / "config.txt", "preprocess", c);
        const PatchConfig pc = aug.patches();
        pc.validate();
        const Manifest m = build_manifest(load_corpus(in), pc, aug.global_size, seed);
        write_manifest(m, out);
        const auto counts = m.counts();
        std::cout << m.patches.size() << " patches, " << m.globals.size() << " global views from " << counts.size()
                  << " sources\n";
    }
};

struct TrainEnhance {
    fs::path manifest, out;
    TrainFlags train;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("train-enhance", "Train the per-channel enhancement generators");
        app->add_option("--manifest", manifest, "manifest directory from preprocess")->required();
        app->add_option("--out", out, "run directory (default $DOCBIN_OUT_ROOT/train)");
        train.add(app, &StageConfig::epochs_enhancement, "enhancement epochs");
        app->callback([this] { run(); });
    }

    void run() {
        if (out.empty()) out = default_out("train");
        const RunDir rd{out};
        rd.create();
        const Manifest m = read_manifest(manifest);
        StageConfig s = train.resolved();
        s.patch_size = m.patch_size;
        s.global_size = m.global_size;
        const PreprocessOption opt = PreprocessOption::from_id(train.option);
        PatchConfig pc;
        pc.patch_size = m.patch_size;
        pc.scales.clear();
        pc.rotations.clear();
        for (const auto& p : m.patches) {
            if (std::find(pc.scales.begin(), pc.scales.end(), p.scale) == pc.scales.end()) pc.scales.push_back(p.scale);
            if (std::find(pc.rotations.begin(), pc.rotations.end(), p.rotation) == pc.rotations.end()) {
                pc.rotations.push_back(p.rotation);
            }
        }
        ConfigMap c = describe(s, opt, pc);
        c.set("manifest", manifest.string());
        write_config(rd.config(), "train-enhance", c);
        s.validate();

        TrainingLog log;
        log.on_epoch = print_losses;
        const EnhancementBundle b = train_enhancement(m.patches, opt, s, &log);
        save_enhancement(b, rd.checkpoints());
        append_losses(rd.losses(), log.history);
    }
};

struct TrainBinarize {
    fs::path manifest, run_dir;
    int epochs = 150;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("train-binarize", "Train the local and global binarization branches");
        app->add_option("--manifest", manifest, "manifest directory from preprocess")->required();
        app->add_option("--run", run_dir, "run directory holding the enhancement checkpoints")->required();
        app->add_option("--epochs", epochs, "binarization epochs")->check(CLI::PositiveNumber);
        app->callback([this] { run(); });
    }

    void run() {
        const RunDir rd{run_dir};
        ConfigMap c = ConfigMap::parse(read_text(rd.config()));
        c.set("command", "train-binarize");
        c.set("epochs_binarization", std::to_string(epochs));
        write_text(rd.config(), c.text());
        const StageConfig s = stage_config_from(c);
        const PreprocessOption opt = option_from(c);
        s.validate();

        const Manifest m = read_manifest(manifest);
        if (m.patch_size != s.patch_size) {
            throw Error(ErrorCode::dimension_mismatch, "manifest patch size differs from the run's enhancement stage");
        }
        const EnhancementBundle enh = load_enhancement(rd.checkpoints());
        TrainingLog log;
        log.on_epoch = print_losses;
        const BinarizationBundle b =
            train_binarization(local_samples(enh, m.patches, opt, s.patch_size), m.globals, s, &log);
        save_binarization(b, rd.checkpoints());
        append_losses(rd.losses(), log.history);
    }
};

struct Infer {
    fs::path run_dir, in, out;
    int batch = 8;
    bool enhanced = false;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("infer", "Binarize images with a trained run");
        app->add_option("--run", run_dir, "trained run directory")->required();
        app->add_option("--in", in, "input image or directory")->required();
        app->add_option("--out", out, "output PGM or directory (default $DOCBIN_OUT_ROOT/infer)");
        app->add_option("--batch", batch, "tiles per forward pass")->check(CLI::PositiveNumber);
        app->add_flag("--enhanced", enhanced, "also write the stage-2 enhancement map as <name>_enhanced.pgm");
        app->callback([this] { run(); });
    }

    void run() {
        const RunDir rd{run_dir};
        const ConfigMap c = ConfigMap::parse(read_text(rd.config()));
        const StageConfig s = stage_config_from(c);
        const PreprocessOption opt = option_from(c);
        const InferenceSizes sizes{s.patch_size, s.global_size, batch};

        const bool single = fs::is_regular_file(in);
        if (!single && !fs::is_directory(in)) throw Error(ErrorCode::missing_file, in.string());
        if (out.empty()) out = default_out("infer");
        const fs::path out_dir = single && out.has_extension() ? out.parent_path() : out;
        if (!out_dir.empty()) make_dir(out_dir);
        ConfigMap e;
        e.set("run", run_dir.string());
        e.set("in", in.string());
        e.set("batch", std::to_string(batch));
        write_config(single && out.has_extension() ? fs::path(out.string() + ".config.txt") : out / "config.txt",
                     "infer", e);

        const EnhancementBundle enh = load_enhancement(rd.checkpoints());
        const BinarizationBundle bin = load_binarization(rd.checkpoints());
        const auto inputs = single ? std::vector<fs::path>{in} : netpbm_files(corpus_images(in));
        for (const auto& path : inputs) {
            const InferenceResult r = infer_detailed(load_image(path), enh, bin, opt, sizes);
            const fs::path dest =
                single && out.has_extension() ? out : out / (path.stem().string() + ".pgm");
            save_binary(r.binary, dest);
            if (enhanced) {
                save_image(to_raster(r.enhanced),
                           dest.parent_path() / (dest.stem().string() + "_enhanced.pgm"));
            }
        }
    }
};

struct Evaluate {
    fs::path pred, gt, out;
    int jobs = 1;
    int dilation = 2;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("evaluate", "Score predictions against ground truth");
        app->add_option("--pred-dir", pred, "predicted binary images")->required();
        app->add_option("--gt-dir", gt, "ground-truth binary images")->required();
        app->add_option("--out", out, "report CSV (default $DOCBIN_OUT_ROOT/evaluate/report.csv)");
        app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        app->add_option("--pfm-dilation", dilation, "3x3 dilation passes for pseudo-precision")
            ->check(CLI::NonNegativeNumber);
        app->callback([this] { run(); });
    }

    void run() {
        if (out.empty()) out = default_out("evaluate") / "report.csv";
        if (out.has_parent_path()) make_dir(out.parent_path());
        ConfigMap c;
        c.set("pred_dir", pred.string());
        c.set("gt_dir", gt.string());
        c.set("jobs", std::to_string(jobs));
        c.set("pfm_dilation", std::to_string(dilation));
        write_config(out.string() + ".config.txt", "evaluate", c);
        const std::string csv = metrics_csv(evaluate_directories(pred, gt, jobs, PseudoFmOptions{dilation}));
        write_text(out, csv);
        std::cout << csv;
    }
};

struct Baseline {
    std::string method;
    fs::path in, out;
    int window = 25;
    std::optional<double> k;
    double r = 0.5;
    int jobs = 1;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("baseline", "Binarize a corpus with a classical threshold");
        app->add_option("--method", method, "otsu, niblack or sauvola")
            ->required()
            ->check(CLI::IsMember({"otsu", "niblack", "sauvola"}));
        app->add_option("--in", in, "image directory or corpus with images/")->required();
        app->add_option("--out", out, "output directory (default $DOCBIN_OUT_ROOT/baseline)");
        app->add_option("--window", window, "local window side (odd)")->check(CLI::PositiveNumber);
        app->add_option("--k", k, "k parameter (default -0.2 niblack, 0.2 sauvola)");
        app->add_option("--R", r, "Sauvola dynamic range on the [0,1] scale")->check(CLI::PositiveNumber);
        app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        app->callback([this] { run(); });
    }

    void run() {
        const double kv = k.value_or(method == "niblack" ? -0.2 : 0.2);
        if (out.empty()) out = default_out("baseline");
        make_dir(out);
        ConfigMap c;
        c.set("method", method);
        c.set("in", in.string());
        c.set("window", std::to_string(window));
        c.set("k", detail::format_real(kv));
        c.set("R", detail::format_real(r));
        c.set("jobs", std::to_string(jobs));
        write_config(out / "config.txt", "baseline", c);

        const auto inputs = netpbm_files(corpus_images(in));
        parallel_map(inputs.size(), jobs, [&](std::size_t i) {
            const Plane gray = to_gray(load_image(inputs[i]));
            const BinaryImage b = method == "otsu"      ? otsu(gray).image
                                  : method == "niblack" ? niblack(gray, window, kv)
                                                        : sauvola(gray, window, kv, r);
            save_binary(b, out / (inputs[i].stem().string() + ".pgm"));
            return 0;
        });
    }
};

struct Ablate {
    fs::path train_dir, test_dir, out;
    std::vector<int> options = {1, 2, 3, 4, 5, 6, 7};
    TrainFlags train;
    AugmentFlags aug;
    int binarization_epochs = 150;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("ablate", "Train and score one pipeline per preprocessing option");
        app->add_option("--train", train_dir, "training corpus")->required();
        app->add_option("--test", test_dir, "held-out corpus")->required();
        app->add_option("--out", out, "run directory (default $DOCBIN_OUT_ROOT/ablate)");
        app->add_option("--options", options, "option ids")
            ->delimiter(',')
            ->check(CLI::Range(1, PreprocessOption::kCount));
        train.add(app, &StageConfig::epochs_enhancement, "enhancement epochs");
        app->add_option("--epochs-binarize", binarization_epochs, "binarization epochs")->check(CLI::PositiveNumber);
        aug.add(app);
        app->callback([this] { run(); });
    }

    void run() {
        if (out.empty()) out = default_out("ablate");
        const RunDir rd{out};
        rd.create();
        StageConfig s = train.resolved();
        s.epochs_binarization = binarization_epochs;
        s.patch_size = aug.patch_size;
        s.global_size = aug.global_size;
        ConfigMap c = describe(s, PreprocessOption::from_id(train.option), aug.patches());
        c.set("options", join_ints(options));
        c.set("train", train_dir.string());
        c.set("test", test_dir.string());
        write_config(rd.config(), "ablate", c);
        s.validate();
        aug.patches().validate();

        const auto rows = run_ablation(load_corpus(train_dir), load_corpus(test_dir), options, s, aug.patches(),
                                       [](int id) { std::cerr << "option " << id << "\n"; });
        const std::string csv = ablation_csv(rows);
        write_text(rd.reports() / "ablation.csv", csv);
        std::cout << csv;
    }
};

struct Report {
    fs::path run_dir;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("report", "Summarize the losses of a run");
        app->add_option("--run", run_dir, "run directory")->required();
        app->callback([this] { run(); });
    }

    /// Last-epoch row of every (stage, network) pair, in first-seen order.
    void run() {
        const RunDir rd{run_dir};
        const auto rows = parse_csv(read_text(rd.losses()));
        if (rows.empty() || rows[0] != loss_columns()) throw Error(ErrorCode::corrupt_header, rd.losses().string());
        std::vector<std::vector<std::string>> last;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            auto it = std::find_if(last.begin(), last.end(),
                                   [&](const auto& r) { return r[0] == rows[i][0] && r[1] == rows[i][1]; });
            if (it == last.end()) {
                last.push_back(rows[i]);
            } else {
                *it = rows[i];
            }
        }
        std::string csv = csv_row(loss_columns());
        for (const auto& r : last) csv += csv_row(r);
        make_dir(rd.reports());
        write_text(rd.reports() / "losses_summary.csv", csv);
        std::cout << csv;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Document binarization toolkit"};
    app.name("docbin");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    Synth synth;
    Preprocess preprocess;
    TrainEnhance train_enhance;
    TrainBinarize train_binarize;
    Infer infer_cmd;
    Evaluate evaluate;
    Ablate ablate;
    Baseline baseline;
    Report report;
    synth.add(app);
    preprocess.add(app);
    train_enhance.add(app);
    train_binarize.add(app);
    infer_cmd.add(app);
    evaluate.add(app);
    ablate.add(app);
    baseline.add(app);
    report.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "docbin: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "docbin: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
