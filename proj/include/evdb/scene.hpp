#pragma once

#include <cstdint>

#include "evdb/image_io.hpp"

namespace evdb::scene {

// Vertical bright bar on a dark background translating horizontally with
// anti-aliased (box coverage) edges; wraps around the right border.
FrameSequence translating_bar(long width, long height, long frames, double speed_px_per_frame,
                              uint64_t frame_interval_us, double bar_width = 6.0,
                              double background = 0.15, double foreground = 0.9);

// Smooth periodic random texture (a few random cosine waves) translating at
// a constant velocity; evaluated analytically so sub-pixel motion is exact.
FrameSequence moving_texture(long width, long height, long frames, double vx_px_per_frame,
                             double vy_px_per_frame, uint64_t frame_interval_us, uint64_t seed,
                             double lo = 0.1, double hi = 0.9);

// Texture sequence whose velocity is drawn from the seed; used to produce
// varied training scenes.
FrameSequence random_motion_texture(long width, long height, long frames,
                                    uint64_t frame_interval_us, uint64_t seed,
                                    double max_speed = 2.0);

} // namespace evdb::scene
