#include "evdb/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "evdb/errors.hpp"

namespace evdb {

void FrameSequence::validate() const {
    if (frames.size() != timestamps.size())
        throw InputError("FrameSequence: frame/timestamp count mismatch");
    for (size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] <= timestamps[i - 1])
            throw InputError("FrameSequence: timestamps must be strictly increasing");
    for (const Tensor& f : frames) {
        if (f.rank() != 2 && !(f.rank() == 3 && f.dim(0) == 3))
            throw InputError("FrameSequence: frames must be [H,W] or [3,H,W]");
        if (!frames.empty() && (f.rank() != frames[0].rank() || !f.same_shape(frames[0])))
            throw InputError("FrameSequence: frames must share one shape");
        if (f.min() < 0.0 || f.max() > 1.0)
            throw InputError("FrameSequence: intensities must lie in [0,1]");
    }
}

long FrameSequence::height() const {
    if (frames.empty()) throw InputError("FrameSequence: empty");
    return frames[0].rank() == 2 ? frames[0].dim(0) : frames[0].dim(1);
}

long FrameSequence::width() const {
    if (frames.empty()) throw InputError("FrameSequence: empty");
    return frames[0].rank() == 2 ? frames[0].dim(1) : frames[0].dim(2);
}

bool FrameSequence::is_color() const { return !frames.empty() && frames[0].rank() == 3; }

namespace img {

namespace {

int next_token(std::istream& is) {
    // parse an ASCII integer, skipping whitespace and '#' comments
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (std::isspace(c)) {
            c = is.get();
        } else {
            break;
        }
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = is.get();
    }
    if (!any) throw InputError("malformed PNM header");
    return value;
}

uint8_t to_byte(double v) {
    const double q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<uint8_t>(q);
}

} // namespace

Tensor load_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char p, kind;
    is.get(p);
    is.get(kind);
    if (p != 'P' || (kind != '5' && kind != '6')) throw InputError("not a P5/P6 file: " + path);
    long w, h, maxval;
    try {
        w = next_token(is);
        h = next_token(is);
        maxval = next_token(is);
    } catch (const InputError&) {
        throw InputError("malformed PNM header: " + path);
    }
    if (maxval != 255) throw InputError("only 8-bit PNM supported: " + path);
    const long channels = kind == '6' ? 3 : 1;
    std::vector<char> raw(static_cast<size_t>(w * h * channels));
    is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!is) throw InputError("truncated PNM data: " + path);
    if (channels == 1) {
        Tensor t({h, w});
        for (long i = 0; i < h * w; ++i)
            t[i] = static_cast<uint8_t>(raw[static_cast<size_t>(i)]) / 255.0;
        return t;
    }
    Tensor t({3, h, w});
    for (long i = 0; i < h * w; ++i)
        for (long c = 0; c < 3; ++c)
            t[c * h * w + i] = static_cast<uint8_t>(raw[static_cast<size_t>(i * 3 + c)]) / 255.0;
    return t;
}

void save_pgm(const std::string& path, const Tensor& gray) {
    if (gray.rank() != 2) throw DimError("save_pgm: expected [H,W], got " + gray.shape_str());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P5\n" << gray.dim(1) << " " << gray.dim(0) << "\n255\n";
    std::vector<char> raw(static_cast<size_t>(gray.size()));
    for (long i = 0; i < gray.size(); ++i) raw[static_cast<size_t>(i)] = static_cast<char>(to_byte(gray[i]));
    os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!os) throw IoError("write failed: " + path);
}

void save_ppm(const std::string& path, const Tensor& rgb) {
    if (rgb.rank() != 3 || rgb.dim(0) != 3)
        throw DimError("save_ppm: expected [3,H,W], got " + rgb.shape_str());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const long h = rgb.dim(1), w = rgb.dim(2);
    os << "P6\n" << w << " " << h << "\n255\n";
    std::vector<char> raw(static_cast<size_t>(3 * h * w));
    for (long i = 0; i < h * w; ++i)
        for (long c = 0; c < 3; ++c)
            raw[static_cast<size_t>(i * 3 + c)] = static_cast<char>(to_byte(rgb[c * h * w + i]));
    os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!os) throw IoError("write failed: " + path);
}

void save_pnm(const std::string& path, const Tensor& image) {
    if (image.rank() == 2)
        save_pgm(path, image);
    else
        save_ppm(path, image);
}

Tensor luma(const Tensor& image) {
    if (image.rank() == 2) return image.detach();
    if (image.rank() != 3 || image.dim(0) != 3)
        throw DimError("luma: expected [H,W] or [3,H,W], got " + image.shape_str());
    const long h = image.dim(1), w = image.dim(2);
    Tensor y({h, w});
    const double* r = image.data();
    const double* g = image.data() + h * w;
    const double* b = image.data() + 2 * h * w;
    for (long i = 0; i < h * w; ++i) y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return y;
}

FrameSequence load_frame_dir(const std::string& dir, uint64_t frame_interval_us) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
    std::vector<std::pair<long long, fs::path>> entries;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        const std::string ext = p.extension().string();
        if (ext != ".pgm" && ext != ".ppm") continue;
        std::string digits;
        for (char c : p.stem().string())
            if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
        if (digits.empty())
            throw InputError("frame file name carries no index: " + p.string());
        entries.emplace_back(std::stoll(digits), p);
    }
    if (entries.empty()) throw InputError("no .pgm/.ppm frames in " + dir);
    std::sort(entries.begin(), entries.end());
    FrameSequence seq;
    for (size_t i = 0; i < entries.size(); ++i) {
        seq.frames.push_back(load_pnm(entries[i].second.string()));
        seq.timestamps.push_back(static_cast<uint64_t>(i) * frame_interval_us);
    }
    seq.validate();
    return seq;
}

} // namespace img

} // namespace evdb
