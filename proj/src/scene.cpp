#include "evdb/scene.hpp"

#include <cmath>
#include <vector>

#include "evdb/rng.hpp"

namespace evdb::scene {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Coverage of pixel [x, x+1) by the interval [a, b) on a cyclic axis of
// length `period`.
double bar_coverage(double x, double a, double b, double period) {
    double cov = 0.0;
    for (int wrap = -1; wrap <= 1; ++wrap) {
        const double lo = a + wrap * period;
        const double hi = b + wrap * period;
        cov += std::max(0.0, std::min(hi, x + 1.0) - std::max(lo, x));
    }
    return std::min(cov, 1.0);
}

} // namespace

FrameSequence translating_bar(long width, long height, long frames, double speed_px_per_frame,
                              uint64_t frame_interval_us, double bar_width, double background,
                              double foreground) {
    FrameSequence seq;
    for (long j = 0; j < frames; ++j) {
        const double pos = std::fmod(static_cast<double>(j) * speed_px_per_frame,
                                     static_cast<double>(width));
        Tensor f({height, width});
        for (long x = 0; x < width; ++x) {
            const double cov = bar_coverage(static_cast<double>(x), pos, pos + bar_width,
                                            static_cast<double>(width));
            const double v = background + (foreground - background) * cov;
            for (long y = 0; y < height; ++y) f[y * width + x] = v;
        }
        seq.frames.push_back(std::move(f));
        seq.timestamps.push_back(static_cast<uint64_t>(j) * frame_interval_us);
    }
    seq.validate();
    return seq;
}

namespace {

struct Wave {
    double fx, fy, phase, amp;
};

std::vector<Wave> make_waves(long width, long height, Rng& rng) {
    std::vector<Wave> waves;
    const long k = 5;
    for (long i = 0; i < k; ++i) {
        Wave w;
        // low integer frequencies keep the texture periodic over the frame
        w.fx = static_cast<double>(1 + static_cast<long>(rng.uniform_index(3))) /
               static_cast<double>(width);
        w.fy = static_cast<double>(1 + static_cast<long>(rng.uniform_index(3))) /
               static_cast<double>(height);
        if (rng.uniform() < 0.5) w.fx = -w.fx;
        w.phase = rng.uniform(0.0, kTwoPi);
        w.amp = rng.uniform(0.4, 1.0);
        waves.push_back(w);
    }
    return waves;
}

FrameSequence texture_sequence(long width, long height, long frames, double vx, double vy,
                               uint64_t frame_interval_us, const std::vector<Wave>& waves,
                               double lo, double hi) {
    double amp_total = 0.0;
    for (const Wave& w : waves) amp_total += w.amp;
    FrameSequence seq;
    for (long j = 0; j < frames; ++j) {
        const double ox = vx * static_cast<double>(j);
        const double oy = vy * static_cast<double>(j);
        Tensor f({height, width});
        for (long y = 0; y < height; ++y)
            for (long x = 0; x < width; ++x) {
                double v = 0.0;
                for (const Wave& w : waves)
                    v += w.amp * std::cos(kTwoPi * (w.fx * (static_cast<double>(x) - ox) +
                                                    w.fy * (static_cast<double>(y) - oy)) +
                                          w.phase);
                // v in [-amp_total, amp_total] -> [lo, hi]
                f[y * width + x] = lo + (hi - lo) * (v + amp_total) / (2.0 * amp_total);
            }
        seq.frames.push_back(std::move(f));
        seq.timestamps.push_back(static_cast<uint64_t>(j) * frame_interval_us);
    }
    seq.validate();
    return seq;
}

} // namespace

FrameSequence moving_texture(long width, long height, long frames, double vx_px_per_frame,
                             double vy_px_per_frame, uint64_t frame_interval_us, uint64_t seed,
                             double lo, double hi) {
    Rng rng(seed);
    const std::vector<Wave> waves = make_waves(width, height, rng);
    return texture_sequence(width, height, frames, vx_px_per_frame, vy_px_per_frame,
                            frame_interval_us, waves, lo, hi);
}

FrameSequence random_motion_texture(long width, long height, long frames,
                                    uint64_t frame_interval_us, uint64_t seed, double max_speed) {
    Rng rng(seed);
    const std::vector<Wave> waves = make_waves(width, height, rng);
    const double angle = rng.uniform(0.0, kTwoPi);
    const double speed = rng.uniform(0.5 * max_speed, max_speed);
    return texture_sequence(width, height, frames, speed * std::cos(angle),
                            speed * std::sin(angle), frame_interval_us, waves, 0.1, 0.9);
}

} // namespace evdb::scene
