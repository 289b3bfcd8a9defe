#ifndef DOCBIN_PIPELINE_RUN_DIR_HPP
#define DOCBIN_PIPELINE_RUN_DIR_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "docbin/io/csv.hpp"
#include "docbin/nn/checkpoint.hpp"
#include "docbin/pipeline/training.hpp"

namespace docbin {

/// Ordered key=value configuration; later `set` calls overwrite in place.
class ConfigMap {
public:
    void set(const std::string& key, std::string value) {
        for (auto& [k, v] : entries_) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        entries_.emplace_back(key, std::move(value));
    }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw Error(ErrorCode::corrupt_header, "config key '" + key + "' missing");
        return *v;
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string text() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
        return out;
    }

    static ConfigMap parse(const std::string& text) {
        ConfigMap m;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::corrupt_header, "config line without '=': " + line);
            m.set(line.substr(0, eq), line.substr(eq + 1));
        }
        return m;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + detail::format_real(v[i]);
    return s;
}

inline std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline const char* to_string(nn::PenaltyMode m) {
    return m == nn::PenaltyMode::reverse_over_reverse ? "reverse_over_reverse" : "finite_difference";
}

inline nn::PenaltyMode parse_penalty_mode(const std::string& s) {
    if (s == "reverse_over_reverse") return nn::PenaltyMode::reverse_over_reverse;
    if (s == "finite_difference") return nn::PenaltyMode::finite_difference;
    throw Error(ErrorCode::invalid_argument, "unknown penalty mode " + s);
}

/// Everything needed to reproduce a training run.
inline ConfigMap describe(const StageConfig& s, const PreprocessOption& opt, const PatchConfig& p) {
    ConfigMap m;
    m.set("option", std::to_string(opt.option_id));
    m.set("input_mode", to_string(opt.input_mode));
    m.set("gt_mode", to_string(opt.gt_mode));
    m.set("alpha", detail::format_real(s.loss.alpha));
    m.set("lambda", detail::format_real(s.loss.lambda));
    m.set("penalty_mode", to_string(s.loss.penalty_mode));
    m.set("lr", detail::format_real(s.adam.lr));
    m.set("beta1", detail::format_real(s.adam.beta1));
    m.set("beta2", detail::format_real(s.adam.beta2));
    m.set("adam_eps", detail::format_real(s.adam.eps));
    m.set("epochs_enhancement", std::to_string(s.epochs_enhancement));
    m.set("epochs_binarization", std::to_string(s.epochs_binarization));
    m.set("batch_size", std::to_string(s.batch_size));
    m.set("seed", std::to_string(s.seed));
    m.set("patch_size", std::to_string(s.patch_size));
    m.set("global_size", std::to_string(s.global_size));
    m.set("scales", join_reals(p.scales));
    m.set("rotations", join_ints(p.rotations));
    return m;
}

inline StageConfig stage_config_from(const ConfigMap& m) {
    StageConfig s;
    s.loss.alpha = detail::parse_real(m.require("alpha"));
    s.loss.lambda = detail::parse_real(m.require("lambda"));
    s.loss.penalty_mode = parse_penalty_mode(m.require("penalty_mode"));
    s.adam.lr = detail::parse_real(m.require("lr"));
    s.adam.beta1 = detail::parse_real(m.require("beta1"));
    s.adam.beta2 = detail::parse_real(m.require("beta2"));
    s.adam.eps = detail::parse_real(m.require("adam_eps"));
    s.epochs_enhancement = static_cast<int>(detail::parse_int(m.require("epochs_enhancement")));
    s.epochs_binarization = static_cast<int>(detail::parse_int(m.require("epochs_binarization")));
    s.batch_size = static_cast<int>(detail::parse_int(m.require("batch_size")));
    s.seed = std::stoull(m.require("seed"));
    s.patch_size = static_cast<int>(detail::parse_int(m.require("patch_size")));
    s.global_size = static_cast<int>(detail::parse_int(m.require("global_size")));
    return s;
}

inline PreprocessOption option_from(const ConfigMap& m) {
    return PreprocessOption::from_id(static_cast<int>(detail::parse_int(m.require("option"))));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline std::string read_text(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::missing_file, path.string());
    const auto bytes = detail::read_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

/// <root>/config.txt, <root>/checkpoints/, <root>/losses.csv, <root>/reports/.
struct RunDir {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.txt"; }
    std::filesystem::path checkpoints() const { return root / "checkpoints"; }
    std::filesystem::path losses() const { return root / "losses.csv"; }
    std::filesystem::path reports() const { return root / "reports"; }

    void create() const {
        std::error_code ec;
        std::filesystem::create_directories(checkpoints(), ec);
        std::filesystem::create_directories(reports(), ec);
        if (ec) throw Error(ErrorCode::unwritable_path, root.string());
    }
};

inline const std::vector<std::string>& loss_columns() {
    static const std::vector<std::string> cols = {"stage", "network", "epoch", "d_loss", "penalty", "g_loss", "bce",
                                                  "steps"};
    return cols;
}

inline std::string loss_row(const LossRecord& r) {
    return csv_row({r.stage, r.network, std::to_string(r.epoch), detail::format_real(r.d_loss),
                    detail::format_real(r.penalty), detail::format_real(r.g_loss), detail::format_real(r.bce),
                    std::to_string(r.steps)});
}

/// Appends to losses.csv, writing the header first if the file is new.
inline void append_losses(const std::filesystem::path& path, const std::vector<LossRecord>& rows) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::unwritable_path, path.string());
    if (fresh) out << csv_row(loss_columns());
    for (const auto& r : rows) out << loss_row(r);
}

inline void save_enhancement(const EnhancementBundle& b, const std::filesystem::path& dir) {
    for (int c = 0; c < kChannelCount; ++c) {
        nn::save_checkpoint(b.generators[c], dir / (std::string("enhance_") + ChannelSet::names[c] + ".ckpt"));
    }
    nn::save_checkpoint(b.discriminator, dir / "enhance_critic.ckpt");
}

inline EnhancementBundle load_enhancement(const std::filesystem::path& dir) {
    EnhancementBundle b;
    for (int c = 0; c < kChannelCount; ++c) {
        b.generators[c] = nn::load_checkpoint(dir / (std::string("enhance_") + ChannelSet::names[c] + ".ckpt"));
    }
    b.discriminator = nn::load_checkpoint(dir / "enhance_critic.ckpt");
    return b;
}

inline void save_binarization(const BinarizationBundle& b, const std::filesystem::path& dir) {
    nn::save_checkpoint(b.local_generator, dir / "binarize_local.ckpt");
    nn::save_checkpoint(b.local_discriminator, dir / "binarize_local_critic.ckpt");
    nn::save_checkpoint(b.global_generator, dir / "binarize_global.ckpt");
    nn::save_checkpoint(b.global_discriminator, dir / "binarize_global_critic.ckpt");
}

inline BinarizationBundle load_binarization(const std::filesystem::path& dir) {
    return {nn::load_checkpoint(dir / "binarize_local.ckpt"), nn::load_checkpoint(dir / "binarize_local_critic.ckpt"),
            nn::load_checkpoint(dir / "binarize_global.ckpt"),
            nn::load_checkpoint(dir / "binarize_global_critic.ckpt")};
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_RUN_DIR_HPP
