#pragma once

#include <cstdint>
#include <vector>

#include "evdb/events.hpp"
#include "evdb/tensor.hpp"

namespace evdb {

enum class PolarityMode { kSigned, kTwoChannel };

// Spatio-temporal event embedding over B temporal bins. Each event spreads a
// unit weight across at most 2 adjacent bins with a bilinear kernel in time.
struct VoxelGrid {
    Tensor bins;            // signed: [B,H,W]; two-channel: [2B,H,W] (pos, then neg)
    uint64_t t0 = 0, t1 = 0;
    PolarityMode mode = PolarityMode::kSigned;
    long skipped = 0;       // events outside [t0, t1), not embedded
};

VoxelGrid to_voxel(const EventStream& stream, uint64_t t0, uint64_t t1, long bins,
                   PolarityMode mode = PolarityMode::kSigned);

// N equal-time temporal units covering [t0, t1); each unit is a [2,H,W]
// tensor of per-pixel integer event counts, channel 0 positive polarity,
// channel 1 negative polarity.
struct EventUnits {
    std::vector<Tensor> units;
    uint64_t t0 = 0, t1 = 0;
    long n = 0;
};

EventUnits split_units(const EventStream& stream, uint64_t t0, uint64_t t1, long n);

// Strict time-partition of a stream into past period [past_begin, cur_begin)
// and current period [cur_begin, cur_end); no event lands in both.
std::pair<EventStream, EventStream> partition_past_current(const EventStream& stream,
                                                           uint64_t past_begin,
                                                           uint64_t cur_begin,
                                                           uint64_t cur_end);

} // namespace evdb
