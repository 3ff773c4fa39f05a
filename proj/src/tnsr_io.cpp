#include "evdb/tnsr_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "evdb/errors.hpp"

namespace evdb {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
T take(std::istream& is) {
    char buf[sizeof(T)];
    is.read(buf, sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace

void write_tnsr_stream(std::ostream& os, const Tensor& t) {
    os.write("TNSR", 4);
    put<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) put<uint32_t>(os, static_cast<uint32_t>(t.dim(i)));
    std::vector<char> raw(static_cast<size_t>(t.size()) * 4);
    for (long i = 0; i < t.size(); ++i) {
        const float f = static_cast<float>(t[i]);
        std::memcpy(raw.data() + static_cast<size_t>(i) * 4, &f, 4);
    }
    os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

Tensor read_tnsr_stream(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TNSR", 4) != 0) throw InputError("not a TNSR blob");
    const uint32_t rank = take<uint32_t>(is);
    if (rank > 4) throw InputError("TNSR rank > 4");
    std::vector<long> shape;
    for (uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<long>(take<uint32_t>(is)));
    Tensor t(shape);
    std::vector<char> raw(static_cast<size_t>(t.size()) * 4);
    is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!is) throw InputError("truncated TNSR data");
    for (long i = 0; i < t.size(); ++i) {
        float f;
        std::memcpy(&f, raw.data() + static_cast<size_t>(i) * 4, 4);
        t[i] = static_cast<double>(f);
    }
    return t;
}

void write_tnsr(const std::string& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_tnsr_stream(os, t);
    if (!os) throw IoError("write failed: " + path);
}

Tensor read_tnsr(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    return read_tnsr_stream(is);
}

} // namespace evdb
