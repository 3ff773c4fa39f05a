#include "evdb/physics.hpp"

#include <algorithm>
#include <cmath>

#include "evdb/errors.hpp"

namespace evdb {

EventStream simulate_events(const FrameSequence& seq, double beta, double log_floor) {
    seq.validate();
    if (seq.count() < 2) throw InputError("simulate_events: need at least 2 frames");
    if (beta <= 0.0) throw InputError("simulate_events: beta must be positive");
    if (log_floor <= 0.0) throw InputError("simulate_events: log_floor must be positive");

    const long h = seq.height(), w = seq.width();
    EventStream out;
    out.width = w;
    out.height = h;
    out.beta = beta;
    out.t_begin = seq.timestamps.front();
    out.t_end = seq.timestamps.back();

    auto log_plane = [&](const Tensor& frame) {
        Tensor l = img::luma(frame);
        Tensor res({h, w});
        for (long i = 0; i < h * w; ++i) res[i] = std::log(std::max(l[i], log_floor));
        return res;
    };

    Tensor ref = log_plane(seq.frames[0]);
    for (long j = 0; j + 1 < seq.count(); ++j) {
        const uint64_t t0 = seq.timestamps[static_cast<size_t>(j)];
        const uint64_t t1 = seq.timestamps[static_cast<size_t>(j + 1)];
        const uint64_t span = t1 - t0;
        Tensor cur = log_plane(seq.frames[static_cast<size_t>(j + 1)]);
        for (long y = 0; y < h; ++y) {
            for (long x = 0; x < w; ++x) {
                const long i = y * w + x;
                const double delta = cur[i] - ref[i];
                const double mag = std::abs(delta);
                if (mag < beta) continue;
                const long count = static_cast<long>(std::floor(mag / beta));
                if (count <= 0) continue;
                const int8_t sign = delta > 0.0 ? int8_t{1} : int8_t{-1};
                for (long n = 1; n <= count; ++n) {
                    // crossing of the n-th threshold on the linear log ramp
                    const double frac = static_cast<double>(n) * beta / mag;
                    uint64_t t = t0 + static_cast<uint64_t>(std::floor(frac * static_cast<double>(span)));
                    if (t >= t1) t = t1 - 1; // keep inside [t0, t1)
                    out.events.push_back(Event{t, static_cast<uint16_t>(x),
                                               static_cast<uint16_t>(y), sign});
                }
                ref[i] += static_cast<double>(count) * beta * static_cast<double>(sign);
            }
        }
    }
    sort_events(out.events);
    if (out.t_end == out.t_begin) out.t_end = out.t_begin + 1;
    out.validate();
    return out;
}

namespace {

// Signed polarity count per pixel over [t0, t1), accumulated into counts.
void accumulate_counts(const EventStream& stream, uint64_t t0, uint64_t t1, long w,
                       std::vector<long>& counts, long sign) {
    auto lo = std::lower_bound(stream.events.begin(), stream.events.end(), t0,
                               [](const Event& e, uint64_t t) { return e.t < t; });
    auto hi = std::lower_bound(stream.events.begin(), stream.events.end(), t1,
                               [](const Event& e, uint64_t t) { return e.t < t; });
    for (auto it = lo; it != hi; ++it)
        counts[static_cast<size_t>(it->y * w + it->x)] += sign * it->p;
}

} // namespace

Tensor integrate_events(const Tensor& i1, const EventStream& stream, uint64_t t1, uint64_t t2) {
    if (i1.rank() != 2) throw DimError("integrate_events: expected [H,W] plane");
    if (i1.dim(0) != stream.height || i1.dim(1) != stream.width)
        throw DimError("integrate_events: plane does not match sensor size");
    if (t2 < t1) throw InputError("integrate_events: t2 < t1");
    const long h = i1.dim(0), w = i1.dim(1);
    std::vector<long> counts(static_cast<size_t>(h * w), 0);
    accumulate_counts(stream, t1, t2, w, counts, +1);
    Tensor out({h, w});
    for (long i = 0; i < h * w; ++i)
        out[i] = std::clamp(i1[i] * std::exp(stream.beta * static_cast<double>(counts[static_cast<size_t>(i)])),
                            0.0, 1.0);
    return out;
}

Tensor synthesize_blur(const FrameSequence& latents) {
    if (latents.frames.empty()) throw InputError("synthesize_blur: no frames");
    latents.validate();
    Tensor acc = latents.frames[0].clone();
    for (size_t j = 1; j < latents.frames.size(); ++j) {
        const Tensor& f = latents.frames[j];
        for (long i = 0; i < acc.size(); ++i) acc[i] += f[i];
    }
    const double inv = 1.0 / static_cast<double>(latents.frames.size());
    for (long i = 0; i < acc.size(); ++i) acc[i] *= inv;
    return acc;
}

ResidualSum residual_sum(const EventStream& stream, uint64_t anchor,
                         const std::vector<uint64_t>& sample_times) {
    if (sample_times.empty()) throw InputError("residual_sum: no sample times");
    for (uint64_t t : sample_times)
        if (t < stream.t_begin || t > stream.t_end)
            throw InputError("residual_sum: sample time outside the stream span");
    const long h = stream.height, w = stream.width;
    ResidualSum rs;
    rs.beta = stream.beta;
    rs.s = Tensor({h, w});
    std::vector<long> counts(static_cast<size_t>(h * w));
    for (uint64_t tau : sample_times) {
        std::fill(counts.begin(), counts.end(), 0L);
        if (tau >= anchor)
            accumulate_counts(stream, anchor, tau, w, counts, +1);
        else
            accumulate_counts(stream, tau, anchor, w, counts, -1);
        for (long i = 0; i < h * w; ++i)
            rs.s[i] += std::exp(stream.beta * static_cast<double>(counts[static_cast<size_t>(i)]));
    }
    const double inv = 1.0 / static_cast<double>(sample_times.size());
    for (long i = 0; i < h * w; ++i) rs.s[i] *= inv;
    return rs;
}

Tensor edi_deblur(const Tensor& blur, const ResidualSum& rs) {
    if (blur.rank() != 2) throw DimError("edi_deblur: expected [H,W] plane");
    if (!blur.same_shape(rs.s)) throw DimError("edi_deblur: blur and S shapes differ");
    Tensor out(blur.shape());
    for (long i = 0; i < blur.size(); ++i) {
        if (!(rs.s[i] > 0.0)) throw StateError("edi_deblur: non-positive residual sum entry");
        out[i] = std::clamp(blur[i] / rs.s[i], 0.0, 1.0);
    }
    return out;
}

Tensor edi_deblur_rgb(const Tensor& blur_rgb, const ResidualSum& rs) {
    if (blur_rgb.rank() != 3 || blur_rgb.dim(0) != 3)
        throw DimError("edi_deblur_rgb: expected [3,H,W]");
    const long hw = blur_rgb.dim(1) * blur_rgb.dim(2);
    if (rs.s.size() != hw) throw DimError("edi_deblur_rgb: S shape mismatch");
    Tensor out(blur_rgb.shape());
    for (long i = 0; i < hw; ++i) {
        if (!(rs.s[i] > 0.0)) throw StateError("edi_deblur_rgb: non-positive residual sum entry");
        const double gain = 1.0 / rs.s[i];
        for (long c = 0; c < 3; ++c)
            out[c * hw + i] = std::clamp(blur_rgb[c * hw + i] * gain, 0.0, 1.0);
    }
    return out;
}

} // namespace evdb
