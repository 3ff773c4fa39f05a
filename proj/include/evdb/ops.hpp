#pragma once

#include <vector>

#include "evdb/tensor.hpp"

// Differentiable tensor primitives. All functions are pure: inputs are never
// modified, outputs are freshly allocated, and an autograd node is attached
// to the output whenever any input carries one. Every primitive checks its
// output for NaN/Inf and throws NumericError on violation.
namespace evdb::ops {

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

// ---- reductions ----
Tensor sum_all(const Tensor& a);                  // -> [1]
Tensor mean_all(const Tensor& a);                 // -> [1]
Tensor gap(const Tensor& a);                      // [N,C,H,W] -> [N,C,1,1] spatial mean
Tensor mean_batch(const Tensor& a);               // [N,C,H,W] -> [1,C,H,W]

// ---- shape ----
Tensor reshape(const Tensor& a, std::vector<long> shape);
Tensor concat_channels(const Tensor& a, const Tensor& b);     // along axis 1 (4-D)
Tensor stack_batch(const std::vector<Tensor>& parts);         // k x [1,C,H,W] -> [k,C,H,W]
Tensor repeat_batch(const Tensor& a, long t);                 // [1,C,H,W] -> [t,C,H,W]
// Nearest-neighbour channel upsampling: each channel repeated `r` times
// consecutively. [N,C,H,W] -> [N,C*r,H,W].
Tensor repeat_channels(const Tensor& a, long r);

// ---- broadcast arithmetic ----
Tensor scale_channels(const Tensor& x, const Tensor& z);      // x:[N,C,H,W] * z:[N,C,1,1]
Tensor mul_plane(const Tensor& x, const Tensor& m);           // x:[N,C,H,W] * m:[N,1,H,W]
Tensor add_broadcast_batch(const Tensor& x, const Tensor& b); // x:[N,C,H,W] + b:[1,C,H,W]

// ---- neural primitives ----
// Cross-correlation with zero padding. x: [N,Cin,H,W] or [Cin,H,W];
// w: [Cout,Cin,k,k]; optional bias [Cout]. pad < 0 selects (k-1)/2.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, long stride = 1,
              long pad = -1);

// Group normalization over [N,C,H,W] (per sample, per group of channels).
// gamma/beta [C] are optional (pass undefined tensors for plain normalize).
Tensor group_norm(const Tensor& x, long groups, double eps, const Tensor& gamma,
                  const Tensor& beta);

// Per-pixel convolution: every output pixel applies its own k x k kernel to
// its zero-padded neighbourhood, per channel. x: [N,C,H,W] or [C,H,W];
// kernels: [N,C*k*k,H,W] (plane index c*k*k + dy*k + dx).
Tensor dynamic_conv(const Tensor& x, const Tensor& kernels, long k);

// Bilinear x2 upsampling, align_corners=false. [N,C,H,W] -> [N,C,2H,2W].
Tensor upsample2x(const Tensor& x);

// 2x2 average pooling (H, W must be even).
Tensor avg_pool2x(const Tensor& x);

// Fully connected: x [N,F] * w [O,F]^T + b [O] -> [N,O].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// Channel statistics: mean and max over the channel axis, stacked.
// [N,C,H,W] -> [N,2,H,W] (plane 0 mean, plane 1 max).
Tensor channel_mean_max(const Tensor& x);

// Charbonnier penalty sqrt((a-b)^2 + eps^2), averaged over all elements.
Tensor charbonnier(const Tensor& a, const Tensor& b, double eps);

// Clamp without gradient (evaluation-time use).
Tensor clamp01(const Tensor& x);

} // namespace evdb::ops
