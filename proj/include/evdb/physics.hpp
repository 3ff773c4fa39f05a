#pragma once

#include <cstdint>
#include <vector>

#include "evdb/events.hpp"
#include "evdb/image_io.hpp"
#include "evdb/tensor.hpp"

namespace evdb {

// Per-pixel mean of exponentials of signed event counts between an anchor
// time and a set of sample times; strictly positive everywhere.
struct ResidualSum {
    Tensor s;      // [H,W]
    double beta = 0.0;
};

// Simulates a contrast-threshold sensor over a frame sequence. Per pixel a
// reference log-intensity is kept; between consecutive frames, a jump of
// |delta| in log-intensity emits floor(|delta| / beta) events of the jump's
// sign, timestamps interpolated linearly between the two frame times, and the
// reference advances by the emitted quantity only (sub-threshold residual
// carries over). Color frames are reduced to luma first. Intensities are
// clamped below at log_floor before taking logs.
EventStream simulate_events(const FrameSequence& seq, double beta,
                            double log_floor = 1.0 / 255.0);

// I2(x,y) = clamp(I1(x,y) * exp(beta * sum of polarities in [t1, t2)), 0, 1).
Tensor integrate_events(const Tensor& i1, const EventStream& stream, uint64_t t1, uint64_t t2);

// Per-pixel arithmetic mean of all frames (the motion-blur formation model).
Tensor synthesize_blur(const FrameSequence& latents);

// S(x,y) = (1/N) * sum_i exp(beta * signed event count between anchor and
// sample_times[i]); counts are negated for sample times before the anchor.
ResidualSum residual_sum(const EventStream& stream, uint64_t anchor,
                         const std::vector<uint64_t>& sample_times);

// Model-based deblurring: I = clamp(blur / S, 0, 1). Grayscale plane.
Tensor edi_deblur(const Tensor& blur, const ResidualSum& rs);

// RGB variant: the per-pixel gain 1/S derived on luma applies to every
// channel uniformly.
Tensor edi_deblur_rgb(const Tensor& blur_rgb, const ResidualSum& rs);

} // namespace evdb
