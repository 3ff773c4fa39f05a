#include "evdb/voxel.hpp"

#include <cmath>

#include "evdb/errors.hpp"

namespace evdb {

VoxelGrid to_voxel(const EventStream& stream, uint64_t t0, uint64_t t1, long bins,
                   PolarityMode mode) {
    if (bins < 1) throw ConfigError("to_voxel: bins must be >= 1");
    if (t1 <= t0) throw InputError("to_voxel: degenerate time span");
    const long h = stream.height, w = stream.width;
    VoxelGrid grid;
    grid.t0 = t0;
    grid.t1 = t1;
    grid.mode = mode;
    const long planes = mode == PolarityMode::kSigned ? bins : 2 * bins;
    grid.bins = Tensor({planes, h, w});

    const double span = static_cast<double>(t1 - t0);
    for (const Event& e : stream.events) {
        if (e.t < t0 || e.t >= t1) {
            ++grid.skipped;
            continue;
        }
        // bin coordinate in [0, B-1]; weight 1-|b*-b| over the two neighbours
        const double bstar = bins == 1
                                 ? 0.0
                                 : static_cast<double>(e.t - t0) / span *
                                       static_cast<double>(bins - 1);
        const long b0 = static_cast<long>(std::floor(bstar));
        const long idx = static_cast<long>(e.y) * w + e.x;
        for (long b = b0; b <= b0 + 1; ++b) {
            if (b < 0 || b >= bins) continue;
            const double wgt = 1.0 - std::abs(bstar - static_cast<double>(b));
            if (wgt <= 0.0) continue;
            if (mode == PolarityMode::kSigned) {
                grid.bins[b * h * w + idx] += static_cast<double>(e.p) * wgt;
            } else {
                const long plane = e.p > 0 ? b : bins + b;
                grid.bins[plane * h * w + idx] += wgt;
            }
        }
    }
    return grid;
}

EventUnits split_units(const EventStream& stream, uint64_t t0, uint64_t t1, long n) {
    if (n < 1) throw ConfigError("split_units: unit count must be >= 1");
    if (t1 <= t0) throw InputError("split_units: degenerate time span");
    const long h = stream.height, w = stream.width;
    EventUnits out;
    out.t0 = t0;
    out.t1 = t1;
    out.n = n;
    out.units.reserve(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) out.units.push_back(Tensor({2, h, w}));

    const unsigned __int128 span = t1 - t0;
    for (const Event& e : stream.events) {
        if (e.t < t0 || e.t >= t1) continue;
        // unit index by exact integer arithmetic: floor((t-t0)*n / span)
        const unsigned __int128 off = e.t - t0;
        long u = static_cast<long>(off * static_cast<unsigned __int128>(n) / span);
        if (u >= n) u = n - 1;
        Tensor& unit = out.units[static_cast<size_t>(u)];
        const long idx = static_cast<long>(e.y) * w + e.x;
        if (e.p > 0)
            unit[idx] += 1.0;
        else
            unit[h * w + idx] += 1.0;
    }
    return out;
}

std::pair<EventStream, EventStream> partition_past_current(const EventStream& stream,
                                                           uint64_t past_begin,
                                                           uint64_t cur_begin,
                                                           uint64_t cur_end) {
    if (!(past_begin <= cur_begin && cur_begin <= cur_end))
        throw InputError("partition_past_current: periods must be contiguous and ordered");
    return {stream.slice(past_begin, cur_begin), stream.slice(cur_begin, cur_end)};
}

} // namespace evdb
