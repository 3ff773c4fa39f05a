#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "evdb/errors.hpp"
#include "evdb/metrics.hpp"
#include "evdb/physics.hpp"
#include "evdb/rng.hpp"
#include "evdb/scene.hpp"
#include "oracles.hpp"

using namespace evdb;

namespace {

FrameSequence pixel_sequence(std::vector<double> values, uint64_t dt = 1000) {
    FrameSequence seq;
    for (size_t i = 0; i < values.size(); ++i) {
        seq.frames.push_back(Tensor::from({1, 1}, {values[i]}));
        seq.timestamps.push_back(static_cast<uint64_t>(i) * dt);
    }
    return seq;
}

} // namespace

TEST_CASE("constant sequence emits no events") {
    FrameSequence seq = pixel_sequence({0.5, 0.5, 0.5});
    EventStream s = simulate_events(seq, 0.2);
    CHECK(s.events.empty());
}

TEST_CASE("single positive threshold crossing with residual carry") {
    const double i0 = 0.40;
    // jump of +0.25 in log: one event at beta=0.2, residual 0.05 carries, so
    // a following +0.16 jump (0.21 total drift) emits a second event
    FrameSequence seq =
        pixel_sequence({i0, i0 * std::exp(0.25), i0 * std::exp(0.25) * std::exp(0.16)});
    EventStream s = simulate_events(seq, 0.2);
    REQUIRE(s.events.size() == 2);
    CHECK(s.events[0].p == 1);
    CHECK(s.events[0].t < 1000);
    CHECK(s.events[1].p == 1);
    CHECK(s.events[1].t >= 1000);

    // without the carried residual the second transition alone is silent
    FrameSequence seq2 = pixel_sequence({i0, i0 * std::exp(0.16)});
    CHECK(simulate_events(seq2, 0.2).events.empty());
}

TEST_CASE("two negative events from one large drop") {
    FrameSequence seq = pixel_sequence({0.40, 0.40 * std::exp(-0.45)});
    EventStream s = simulate_events(seq, 0.2);
    REQUIRE(s.events.size() == 2);
    CHECK(s.events[0].p == -1);
    CHECK(s.events[1].p == -1);
}

TEST_CASE("simulate_events rejects bad input") {
    FrameSequence seq = pixel_sequence({0.5});
    CHECK_THROWS_AS(simulate_events(seq, 0.2), InputError);
    FrameSequence bad = pixel_sequence({0.5, 0.6});
    bad.timestamps[1] = bad.timestamps[0];
    CHECK_THROWS_AS(simulate_events(bad, 0.2), InputError);
    CHECK_THROWS_AS(simulate_events(pixel_sequence({0.5, 0.6}), -0.1), InputError);
}

TEST_CASE("integrate_events closed forms") {
    EventStream s;
    s.width = 1;
    s.height = 1;
    s.beta = 0.2;
    s.t_begin = 0;
    s.t_end = 1000;
    Tensor i1 = Tensor::from({1, 1}, {0.40});

    SUBCASE("no events is the identity") {
        Tensor i2 = integrate_events(i1, s, 0, 1000);
        CHECK(i2[0] == doctest::Approx(0.40));
    }
    SUBCASE("one positive event multiplies by e^beta") {
        s.events.push_back({500, 0, 0, 1});
        Tensor i2 = integrate_events(i1, s, 0, 1000);
        CHECK(i2[0] == doctest::Approx(0.40 * std::exp(0.2)).epsilon(1e-12));
        CHECK(i2[0] == doctest::Approx(0.48856).epsilon(1e-4));
    }
    SUBCASE("opposite polarities cancel") {
        s.events.push_back({400, 0, 0, 1});
        s.events.push_back({600, 0, 0, -1});
        Tensor i2 = integrate_events(i1, s, 0, 1000);
        CHECK(i2[0] == doctest::Approx(0.40));
    }
    SUBCASE("window is half-open") {
        s.events.push_back({999, 0, 0, 1});
        Tensor full = integrate_events(i1, s, 0, 1000);
        Tensor cut = integrate_events(i1, s, 0, 999);
        CHECK(full[0] > i1[0]);
        CHECK(cut[0] == doctest::Approx(0.40));
    }
}

TEST_CASE("synthesize_blur examples") {
    FrameSequence same = pixel_sequence({0.3, 0.3, 0.3});
    CHECK(synthesize_blur(same)[0] == doctest::Approx(0.3));

    FrameSequence pair = pixel_sequence({0.0, 1.0});
    CHECK(synthesize_blur(pair)[0] == doctest::Approx(0.5));

    FrameSequence empty;
    CHECK_THROWS_AS(synthesize_blur(empty), InputError);

    // translating bar, 9 frames: per-pixel brute-force mean
    FrameSequence bars = scene::translating_bar(24, 8, 9, 1.5, 1000);
    Tensor blur = synthesize_blur(bars);
    for (long i = 0; i < blur.size(); ++i) {
        double acc = 0.0;
        for (const Tensor& f : bars.frames) acc += f[i];
        CHECK(blur[i] == doctest::Approx(acc / 9.0).epsilon(1e-12));
    }
}

TEST_CASE("residual_sum closed forms and composition oracle") {
    SUBCASE("empty stream gives S = 1") {
        EventStream s;
        s.width = 2;
        s.height = 2;
        s.beta = 0.2;
        s.t_end = 1000;
        ResidualSum rs = residual_sum(s, 0, {0, 500, 999});
        for (long i = 0; i < 4; ++i) CHECK(rs.s[i] == doctest::Approx(1.0));
    }
    SUBCASE("one event between the two sample times") {
        EventStream s;
        s.width = 1;
        s.height = 1;
        s.beta = 0.3;
        s.t_end = 1000;
        s.events.push_back({100, 0, 0, 1});
        ResidualSum rs = residual_sum(s, 0, {0, 500});
        CHECK(rs.s[0] == doctest::Approx((1.0 + std::exp(0.3)) / 2.0).epsilon(1e-12));
    }
    SUBCASE("random scene matches integrate-then-mean with a backward anchor") {
        FrameSequence seq = scene::moving_texture(12, 10, 9, 1.3, -0.7, 1000, 77);
        const double beta = 0.1;
        EventStream s = simulate_events(seq, beta);
        const uint64_t anchor = seq.timestamps[4];
        std::vector<uint64_t> taus(seq.timestamps.begin(), seq.timestamps.end());
        ResidualSum rs = residual_sum(s, anchor, taus);
        // oracle: direct per-event loop per sample time
        for (long y = 0; y < 10; ++y)
            for (long x = 0; x < 12; ++x) {
                double acc = 0.0;
                for (uint64_t tau : taus) {
                    long count = 0;
                    for (const Event& e : s.events) {
                        if (e.x != x || e.y != y) continue;
                        if (tau >= anchor && e.t >= anchor && e.t < tau) count += e.p;
                        if (tau < anchor && e.t >= tau && e.t < anchor) count -= e.p;
                    }
                    acc += std::exp(beta * static_cast<double>(count));
                }
                CHECK(rs.s[y * 12 + x] ==
                      doctest::Approx(acc / static_cast<double>(taus.size())).epsilon(1e-12));
            }
    }
}

TEST_CASE("edi_deblur identities and errors") {
    Rng rng(5);
    Tensor blur = oracle::random_tensor({4, 5}, rng, 0.1, 0.9);
    ResidualSum unit;
    unit.s = Tensor::full({4, 5}, 1.0);
    Tensor out = edi_deblur(blur, unit);
    for (long i = 0; i < out.size(); ++i) CHECK(out[i] == blur[i]);

    ResidualSum bad;
    bad.s = Tensor::zeros({4, 5});
    CHECK_THROWS_AS(edi_deblur(blur, bad), StateError);
}

TEST_CASE("edi_deblur inverts the single-pixel residual example") {
    const double beta = 0.3, latent = 0.5;
    const double s_val = (1.0 + std::exp(beta)) / 2.0;
    Tensor blur = Tensor::from({1, 1}, {latent * s_val});
    ResidualSum rs;
    rs.beta = beta;
    rs.s = Tensor::from({1, 1}, {s_val});
    CHECK(edi_deblur(blur, rs)[0] == doctest::Approx(latent).epsilon(1e-12));
}

TEST_CASE("edi round trip recovers the anchor latent within the quantization bounds") {
    // Per-pixel quantization leaves each latent's event-integrated estimate
    // within e^{+-beta} of its true value. The deblurred frame therefore lands
    // within e^{+-beta} of the *integrated* anchor estimate; against the true
    // anchor latent the anchor's own residual adds a second beta.
    FrameSequence latents = scene::moving_texture(20, 16, 9, 1.8, 0.4, 1000, 11, 0.15, 0.85);
    const double beta = 0.05;
    EventStream events = simulate_events(latents, beta);
    Tensor blur = synthesize_blur(latents);
    const uint64_t anchor = latents.timestamps[4];
    std::vector<uint64_t> taus(latents.timestamps.begin(), latents.timestamps.end());
    Tensor recovered = edi_deblur(blur, residual_sum(events, anchor, taus));

    Tensor anchor_estimate =
        integrate_events(latents.frames[0], events, latents.timestamps[0], anchor);
    const Tensor& truth = latents.frames[4];
    for (long i = 0; i < truth.size(); ++i) {
        CHECK(std::abs(std::log(recovered[i]) - std::log(anchor_estimate[i])) <= beta + 1e-9);
        CHECK(std::abs(std::log(recovered[i]) - std::log(truth[i])) <= 2.0 * beta + 1e-9);
    }
}

TEST_CASE("edi strictly improves PSNR on moving scenes") {
    for (uint64_t seed : {21ULL, 22ULL, 23ULL}) {
        FrameSequence latents = scene::moving_texture(32, 24, 9, 2.0, -1.0, 1000, seed);
        EventStream events = simulate_events(latents, 0.05);
        Tensor blur = synthesize_blur(latents);
        std::vector<uint64_t> taus(latents.timestamps.begin(), latents.timestamps.end());
        Tensor recovered = edi_deblur(blur, residual_sum(events, latents.timestamps[4], taus));
        const Tensor& truth = latents.frames[4];
        CHECK(psnr(recovered, truth) > psnr(blur, truth));
    }
}

TEST_CASE("round-trip bound holds for every frame and pixel") {
    FrameSequence seq = scene::moving_texture(16, 12, 12, 1.1, 0.9, 1000, 33);
    const double beta = 0.2;
    EventStream events = simulate_events(seq, beta);
    for (long j = 1; j < seq.count(); ++j) {
        Tensor est = integrate_events(seq.frames[0], events, seq.timestamps[0],
                                      seq.timestamps[static_cast<size_t>(j)]);
        const Tensor& truth = seq.frames[static_cast<size_t>(j)];
        for (long i = 0; i < est.size(); ++i)
            CHECK(std::abs(std::log(est[i]) - std::log(truth[i])) <= beta + 1e-9);
    }
}

TEST_CASE("polarity symmetry under log-intensity mirroring") {
    FrameSequence seq = scene::moving_texture(14, 10, 8, 1.6, -0.8, 1000, 44, 0.2, 0.8);
    FrameSequence mirrored;
    mirrored.timestamps = seq.timestamps;
    for (const Tensor& f : seq.frames) {
        Tensor m(f.shape());
        for (long i = 0; i < f.size(); ++i) m[i] = 0.16 / f[i]; // log-mirror within [0.2, 0.8]
        mirrored.frames.push_back(std::move(m));
    }
    EventStream a = simulate_events(seq, 0.2);
    EventStream b = simulate_events(mirrored, 0.2);
    REQUIRE(a.events.size() == b.events.size());
    std::map<std::pair<long, long>, long> pol_a, pol_b, cnt_a, cnt_b;
    for (const Event& e : a.events) {
        pol_a[{e.y, e.x}] += e.p;
        cnt_a[{e.y, e.x}] += 1;
    }
    for (const Event& e : b.events) {
        pol_b[{e.y, e.x}] += e.p;
        cnt_b[{e.y, e.x}] += 1;
    }
    CHECK(cnt_a == cnt_b);
    for (const auto& [k, v] : pol_a) CHECK(pol_b[k] == -v);
}

TEST_CASE("EVT1 and CSV round trips") {
    FrameSequence seq = scene::moving_texture(9, 7, 6, 1.2, 0.3, 1000, 55);
    EventStream s = simulate_events(seq, 0.15);
    REQUIRE(!s.events.empty());

    const std::string evt_path = "roundtrip_test.evt1";
    write_evt1(evt_path, s);
    EventStream back = read_evt1(evt_path);
    CHECK(back.width == s.width);
    CHECK(back.height == s.height);
    CHECK(back.beta == s.beta);
    REQUIRE(back.events.size() == s.events.size());
    for (size_t i = 0; i < s.events.size(); ++i) CHECK(back.events[i] == s.events[i]);

    const std::string csv_path = "roundtrip_test.csv";
    write_events_csv(csv_path, s.events);
    std::vector<Event> csv_back = read_events_csv(csv_path);
    REQUIRE(csv_back.size() == s.events.size());
    for (size_t i = 0; i < s.events.size(); ++i) CHECK(csv_back[i] == s.events[i]);

    std::remove(evt_path.c_str());
    std::remove(csv_path.c_str());
}

TEST_CASE("stream validation catches violations") {
    EventStream s;
    s.width = 2;
    s.height = 2;
    s.beta = 0.2;
    s.t_begin = 0;
    s.t_end = 100;
    s.events.push_back({50, 0, 0, 1});
    CHECK_NOTHROW(s.validate());
    s.events.push_back({40, 0, 0, 1}); // out of order
    CHECK_THROWS_AS(s.validate(), InputError);
    sort_events(s.events);
    CHECK_NOTHROW(s.validate());
    s.events.push_back({150, 0, 0, 1}); // outside span
    CHECK_THROWS_AS(s.validate(), InputError);
}
