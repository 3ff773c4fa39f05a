#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evdb {

// One polarity event. Timestamps are microseconds.
struct Event {
    uint64_t t = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    int8_t p = 1; // +1 or -1

    friend bool operator==(const Event&, const Event&) = default;
};

// Stream ordering: by t, ties broken by (y, x, p).
bool event_less(const Event& a, const Event& b);

struct EventStream {
    std::vector<Event> events;
    long width = 0;
    long height = 0;
    double beta = 0.2;       // contrast threshold (log-intensity units)
    uint64_t t_begin = 0;    // span is [t_begin, t_end)
    uint64_t t_end = 0;

    void validate() const;   // throws InputError on any invariant violation
    // Events with t in [t0, t1); the result's span is [t0, t1).
    EventStream slice(uint64_t t0, uint64_t t1) const;
    long polarity_sum() const;
};

void sort_events(std::vector<Event>& events);

// "EVT1" binary container: 8-byte magic "EVT1\0\0\0\0", u32 width, u32 height,
// f64 beta, u64 count, then count records of (u64 t, u16 x, u16 y, i8 p,
// 1 pad byte). Little-endian. The format carries no time span; read_evt1
// sets the span to [0, max event time + 1).
void write_evt1(const std::string& path, const EventStream& stream);
EventStream read_evt1(const std::string& path);

// CSV: header "t,x,y,p", one event per line. Carries no sensor metadata.
void write_events_csv(const std::string& path, const std::vector<Event>& events);
std::vector<Event> read_events_csv(const std::string& path);

} // namespace evdb
