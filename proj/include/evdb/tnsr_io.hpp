#pragma once

#include <string>

#include "evdb/tensor.hpp"

namespace evdb {

// "TNSR" raw tensor format: 4-byte magic, u32 rank, u32 dims[rank], then
// float32 data, little-endian. Values round-trip through f32.
void write_tnsr(const std::string& path, const Tensor& t);
Tensor read_tnsr(const std::string& path);

// Stream variants used by the checkpoint archive.
void write_tnsr_stream(std::ostream& os, const Tensor& t);
Tensor read_tnsr_stream(std::istream& is);

} // namespace evdb
