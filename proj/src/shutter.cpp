#include "evdb/shutter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "evdb/errors.hpp"
#include "evdb/physics.hpp"
#include "evdb/rng.hpp"

namespace evdb {

std::string ShutterConfig::tag() const {
    return "dataset-" + std::to_string(m) + "-" + std::to_string(n);
}

double draw_readout_noise(const ShutterConfig& cfg, long window_index) {
    if (!cfg.noise_enabled || cfg.n == 0) return 0.0;
    Rng rng = Rng::derive(cfg.seed, static_cast<uint64_t>(window_index));
    const double hw = cfg.noise_half_width();
    return rng.uniform(-hw, hw);
}

long draw_exposure_count(const ShutterConfig& cfg, long window_index) {
    const double eps = draw_readout_noise(cfg, window_index);
    const long drawn = std::lround(static_cast<double>(cfg.m) + eps);
    return std::clamp(drawn, 1L, cfg.period());
}

std::vector<ShutterWindow> split_shutter(long total_frames, const ShutterConfig& cfg) {
    if (cfg.m < 1 || cfg.n < 0) throw ConfigError("split_shutter: need m >= 1 and n >= 0");
    const long period = cfg.period();
    if (total_frames < period)
        throw InputError("split_shutter: " + std::to_string(total_frames) +
                         " frames cannot fill a window of " + std::to_string(period));
    std::vector<ShutterWindow> windows;
    for (long start = 0; start + period <= total_frames; start += period) {
        ShutterWindow win;
        win.index = static_cast<long>(windows.size());
        win.m_effective = draw_exposure_count(cfg, win.index);
        for (long i = 0; i < period; ++i) {
            if (i < win.m_effective)
                win.exposure.push_back(start + i);
            else
                win.readout.push_back(start + i);
        }
        windows.push_back(std::move(win));
    }
    return windows;
}

namespace {

uint64_t window_period_end(const FrameSequence& seq, long start, long period) {
    const long next = start + period;
    if (next < seq.count()) return seq.timestamps[static_cast<size_t>(next)];
    // last window: extrapolate by the window's mean frame spacing
    const uint64_t first = seq.timestamps[static_cast<size_t>(start)];
    const uint64_t last = seq.timestamps[static_cast<size_t>(next - 1)];
    const uint64_t mean_dt = (last - first + static_cast<uint64_t>(period) / 2) /
                             static_cast<uint64_t>(period - 1);
    return last + mean_dt;
}

} // namespace

BlurSample make_blur_sample(const FrameSequence& seq, const ShutterWindow& window,
                            const ShutterConfig& cfg) {
    if (window.exposure.empty()) throw StateError("make_blur_sample: empty exposure set");
    for (long idx : window.exposure)
        if (idx < 0 || idx >= seq.count())
            throw InputError("make_blur_sample: exposure index out of range");

    FrameSequence exposure_frames;
    for (long idx : window.exposure) {
        exposure_frames.frames.push_back(seq.frames[static_cast<size_t>(idx)]);
        exposure_frames.timestamps.push_back(seq.timestamps[static_cast<size_t>(idx)]);
    }

    BlurSample sample;
    sample.blur = synthesize_blur(exposure_frames);
    sample.exposure_begin = window.exposure.front();
    sample.exposure_end = window.exposure.back();
    sample.gt_index = window.exposure[window.exposure.size() / 2];
    sample.gt_sharp = seq.frames[static_cast<size_t>(sample.gt_index)].detach();
    sample.gt_time = seq.timestamps[static_cast<size_t>(sample.gt_index)];
    sample.events_begin = seq.timestamps[static_cast<size_t>(window.exposure.front())];
    sample.events_end = window_period_end(seq, window.exposure.front(), cfg.period());
    sample.config_tag = cfg.tag();
    sample.window_index = window.index;
    sample.m_effective = window.m_effective;
    return sample;
}

DatasetResult build_dataset(const FrameSequence& seq, const EventStream& events,
                            const std::vector<ShutterConfig>& configs,
                            const std::string& out_dir) {
    if (configs.empty()) throw InputError("build_dataset: no shutter configs");
    seq.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    write_evt1((fs::path(out_dir) / "events.evt1").string(), events);

    const std::string manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
    std::ofstream manifest(manifest_path);
    if (!manifest) throw IoError("cannot open for writing: " + manifest_path);

    long count = 0;
    for (const ShutterConfig& cfg : configs) {
        const std::vector<ShutterWindow> windows = split_shutter(seq.count(), cfg);
        for (const ShutterWindow& win : windows) {
            BlurSample sample = make_blur_sample(seq, win, cfg);
            char stem[64];
            std::snprintf(stem, sizeof(stem), "%s_w%04ld", cfg.tag().c_str(), win.index);
            const std::string ext = seq.is_color() ? ".ppm" : ".pgm";
            const std::string blur_name = std::string(stem) + "_blur" + ext;
            const std::string sharp_name = std::string(stem) + "_sharp" + ext;
            img::save_pnm((fs::path(out_dir) / blur_name).string(), sample.blur);
            img::save_pnm((fs::path(out_dir) / sharp_name).string(), sample.gt_sharp);

            nlohmann::json rec;
            rec["tag"] = sample.config_tag;
            rec["window"] = sample.window_index;
            rec["m"] = cfg.m;
            rec["n"] = cfg.n;
            rec["m_eff"] = sample.m_effective;
            rec["seed"] = cfg.seed;
            rec["blur"] = blur_name;
            rec["sharp"] = sharp_name;
            rec["events"] = "events.evt1";
            rec["exposure"] = {sample.exposure_begin, sample.exposure_end};
            rec["events_window"] = {sample.events_begin, sample.events_end};
            rec["gt_index"] = sample.gt_index;
            rec["gt_time"] = sample.gt_time;
            manifest << rec.dump() << "\n";
            ++count;
        }
    }
    if (!manifest) throw IoError("write failed: " + manifest_path);
    return DatasetResult{manifest_path, count};
}

} // namespace evdb
