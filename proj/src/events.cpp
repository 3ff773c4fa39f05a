#include "evdb/events.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

#include "evdb/errors.hpp"

namespace evdb {

bool event_less(const Event& a, const Event& b) {
    return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

void sort_events(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(), event_less);
}

void EventStream::validate() const {
    if (beta <= 0.0) throw InputError("EventStream: beta must be positive");
    if (t_end < t_begin) throw InputError("EventStream: t_end < t_begin");
    const Event* prev = nullptr;
    for (const Event& e : events) {
        if (e.t < t_begin || e.t >= t_end)
            throw InputError("EventStream: event at t=" + std::to_string(e.t) +
                             " outside span [" + std::to_string(t_begin) + ", " +
                             std::to_string(t_end) + ")");
        if (e.x >= width || e.y >= height)
            throw InputError("EventStream: event out of sensor bounds");
        if (e.p != 1 && e.p != -1) throw InputError("EventStream: polarity must be +1 or -1");
        if (prev && event_less(e, *prev)) throw InputError("EventStream: events not sorted");
        prev = &e;
    }
}

EventStream EventStream::slice(uint64_t t0, uint64_t t1) const {
    EventStream out;
    out.width = width;
    out.height = height;
    out.beta = beta;
    out.t_begin = t0;
    out.t_end = t1;
    auto lo = std::lower_bound(events.begin(), events.end(), t0,
                               [](const Event& e, uint64_t t) { return e.t < t; });
    auto hi = std::lower_bound(events.begin(), events.end(), t1,
                               [](const Event& e, uint64_t t) { return e.t < t; });
    out.events.assign(lo, hi);
    return out;
}

long EventStream::polarity_sum() const {
    long s = 0;
    for (const Event& e : events) s += e.p;
    return s;
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    // field-by-field little-endian write (host is LE; memcpy avoids aliasing)
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr char kMagic[8] = {'E', 'V', 'T', '1', 0, 0, 0, 0};

} // namespace

void write_evt1(const std::string& path, const EventStream& stream) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 8);
    put<uint32_t>(os, static_cast<uint32_t>(stream.width));
    put<uint32_t>(os, static_cast<uint32_t>(stream.height));
    put<double>(os, stream.beta);
    put<uint64_t>(os, stream.events.size());
    for (const Event& e : stream.events) {
        put<uint64_t>(os, e.t);
        put<uint16_t>(os, e.x);
        put<uint16_t>(os, e.y);
        put<int8_t>(os, e.p);
        put<uint8_t>(os, 0);
    }
    if (!os) throw IoError("write failed: " + path);
}

EventStream read_evt1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw InputError("not an EVT1 file: " + path);
    EventStream s;
    s.width = take<uint32_t>(is);
    s.height = take<uint32_t>(is);
    s.beta = take<double>(is);
    const uint64_t count = take<uint64_t>(is);
    s.events.resize(count);
    uint64_t max_t = 0;
    for (uint64_t i = 0; i < count; ++i) {
        Event& e = s.events[i];
        e.t = take<uint64_t>(is);
        e.x = take<uint16_t>(is);
        e.y = take<uint16_t>(is);
        e.p = take<int8_t>(is);
        take<uint8_t>(is);
        max_t = std::max(max_t, e.t);
    }
    if (!is) throw InputError("truncated EVT1 file: " + path);
    s.t_begin = 0;
    s.t_end = count > 0 ? max_t + 1 : 1;
    s.validate();
    return s;
}

void write_events_csv(const std::string& path, const std::vector<Event>& events) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "t,x,y,p\n";
    for (const Event& e : events)
        os << e.t << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.p) << '\n';
    if (!os) throw IoError("write failed: " + path);
}

std::vector<Event> read_events_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "t,x,y,p")
        throw InputError("bad CSV header in " + path);
    std::vector<Event> events;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        char c1, c2, c3;
        long long t, x, y, p;
        if (!(ls >> t >> c1 >> x >> c2 >> y >> c3 >> p) || c1 != ',' || c2 != ',' || c3 != ',')
            throw InputError("bad CSV event line in " + path + ": " + line);
        Event e;
        e.t = static_cast<uint64_t>(t);
        e.x = static_cast<uint16_t>(x);
        e.y = static_cast<uint16_t>(y);
        e.p = static_cast<int8_t>(p);
        events.push_back(e);
    }
    return events;
}

} // namespace evdb
