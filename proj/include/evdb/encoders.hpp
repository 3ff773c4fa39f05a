#pragma once

#include <array>
#include <vector>

#include "evdb/layers.hpp"
#include "evdb/tensor.hpp"

namespace evdb {

struct EncoderConfig {
    long in_channels = 1;                  // blur luma
    std::array<long, 3> frame_ch{16, 32, 64};
    std::array<long, 3> event_ch{8, 16, 32};
    long hidden_ch = 16;                   // RNN hidden state, kept at scale 1
    long voxel_bins = 16;
};

// Per-scale features; index 0 is full resolution, spatial dims halve per
// scale. Frame features carry one temporal slot, event features T = N+1.
using Pyramid = std::array<Tensor, 3>;

struct FrameEncoder {
    nn::DoubleConv l0, l1, l2;

    FrameEncoder() = default;
    FrameEncoder(const EncoderConfig& cfg, Rng& rng);
    Pyramid operator()(const Tensor& blur) const; // [1,1,H,W] -> [1,C_s,H_s,W_s]
    void params(nn::NamedParams& out) const;
};

struct PastEncoder {
    nn::DoubleConv l0, l1, l2;

    PastEncoder() = default;
    PastEncoder(const EncoderConfig& cfg, Rng& rng);
    Pyramid operator()(const Tensor& past_voxel) const; // [1,B,H,W] -> [1,C^U_s,H_s,W_s]
    void params(nn::NamedParams& out) const;
};

struct RnnState {
    Tensor hidden; // [1,C_h,H/2,W/2], zero at step 0
    long step = 0;
};

// Shared-weight recurrent cell over the N temporal event units. Per unit:
//   s0 = f1(unit)                          (full resolution)
//   s1 = f2(concat(s0, upsample(h)))       (half resolution, stride-2 inside)
//   h' = fh(s1)
//   s2 = f3(s1)                            (quarter resolution)
struct RecurrentEventEncoder {
    nn::DoubleConv f1, f2, fh, f3;
    long hidden_ch = 16;

    RecurrentEventEncoder() = default;
    RecurrentEventEncoder(const EncoderConfig& cfg, Rng& rng);

    RnnState initial_state(long h, long w) const;
    // One recurrent step; `index` must equal state.step (units are consumed
    // in temporal order).
    Pyramid step(const Tensor& unit, long index, RnnState& state) const;
    // All units in order with a fresh state; returns per-unit pyramids.
    std::vector<Pyramid> operator()(const std::vector<Tensor>& units) const;
    void params(nn::NamedParams& out) const;
};

// Temporal concatenation: past features at slot 0, the N units at slots
// 1..N in time order. Per scale: [T,C^U_s,H_s,W_s] with T = N+1.
Pyramid assemble_event_pyramid(const Pyramid& past, const std::vector<Pyramid>& current);

} // namespace evdb
