#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evdb/events.hpp"
#include "evdb/image_io.hpp"
#include "evdb/tensor.hpp"

namespace evdb {

// Shutter period split: m exposure frames followed by n readout frames.
// With noise enabled, each window draws eps ~ U[-0.6n, 0.6n] and uses
// m' = clamp(round(m + eps), 1, m + n) exposure frames instead.
struct ShutterConfig {
    long m = 9;
    long n = 7;
    bool noise_enabled = false;
    uint64_t seed = 0;

    long period() const { return m + n; }
    double noise_half_width() const { return 0.6 * static_cast<double>(n); }
    std::string tag() const; // "dataset-m-n"
};

struct ShutterWindow {
    long index = 0;               // window ordinal within the sequence
    std::vector<long> exposure;   // source frame indices, consecutive
    std::vector<long> readout;
    long m_effective = 0;
};

// Raw noise draw eps ~ U[-0.6n, 0.6n]; deterministic in (cfg.seed, window
// index). Zero when noise is disabled or n == 0.
double draw_readout_noise(const ShutterConfig& cfg, long window_index);

// m' = clamp(round(m + eps), 1, m + n) for one window.
long draw_exposure_count(const ShutterConfig& cfg, long window_index);

// Consecutive disjoint windows of length m+n over the sequence; trailing
// frames that do not fill a window are dropped.
std::vector<ShutterWindow> split_shutter(long total_frames, const ShutterConfig& cfg);

struct BlurSample {
    Tensor blur;                     // mean of the exposure frames
    Tensor gt_sharp;                 // middle exposure frame
    long exposure_begin = 0;         // inclusive source-frame indices
    long exposure_end = 0;
    long gt_index = 0;
    uint64_t gt_time = 0;
    uint64_t events_begin = 0;       // full shutter period [begin, end)
    uint64_t events_end = 0;
    std::string config_tag;
    long window_index = 0;
    long m_effective = 0;
};

BlurSample make_blur_sample(const FrameSequence& seq, const ShutterWindow& window,
                            const ShutterConfig& cfg);

// Synthesizes every window of every config, writes blur/sharp images (8-bit
// PGM/PPM), one EVT1 copy of the event stream, and a JSON-lines manifest.
// Deterministic: a fixed seed reproduces every byte.
struct DatasetResult {
    std::string manifest_path;
    long sample_count = 0;
};

DatasetResult build_dataset(const FrameSequence& seq, const EventStream& events,
                            const std::vector<ShutterConfig>& configs,
                            const std::string& out_dir);

} // namespace evdb
