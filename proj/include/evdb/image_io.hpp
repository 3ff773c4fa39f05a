#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evdb/tensor.hpp"

namespace evdb {

// Intensity frames with timestamps (microseconds, strictly increasing).
// Frames are [H,W] grayscale or [3,H,W] RGB tensors with values in [0,1].
struct FrameSequence {
    std::vector<Tensor> frames;
    std::vector<uint64_t> timestamps;

    void validate() const; // throws InputError
    long count() const { return static_cast<long>(frames.size()); }
    long height() const;
    long width() const;
    bool is_color() const;
};

namespace img {

// 8-bit binary PGM (P5) / PPM (P6). Values quantized as round(v * 255).
Tensor load_pnm(const std::string& path);              // [H,W] or [3,H,W]
void save_pgm(const std::string& path, const Tensor& gray);
void save_ppm(const std::string& path, const Tensor& rgb);
void save_pnm(const std::string& path, const Tensor& img); // picks by rank

// Rec.601 luma; identity for grayscale inputs.
Tensor luma(const Tensor& image);

// Frames from a directory of .pgm/.ppm files, ordered by the numeric value
// embedded in each file name. Timestamps: index * frame_interval_us.
FrameSequence load_frame_dir(const std::string& dir, uint64_t frame_interval_us);

} // namespace img

} // namespace evdb
