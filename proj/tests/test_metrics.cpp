#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evdb/errors.hpp"
#include "evdb/metrics.hpp"
#include "evdb/rng.hpp"
#include "oracles.hpp"

using namespace evdb;

TEST_CASE("psnr closed forms") {
    Rng rng(1);
    Tensor a = oracle::random_tensor({20, 20}, rng, 0.0, 1.0);

    SUBCASE("identical planes cap at 99 dB") { CHECK(psnr(a, a.clone()) == kPsnrCap); }

    SUBCASE("uniform 16/255 difference") {
        Tensor b = a.clone();
        Tensor a2 = a.clone();
        for (long i = 0; i < b.size(); ++i) {
            a2[i] = 0.3;
            b[i] = 0.3 + 16.0 / 255.0;
        }
        CHECK(psnr(a2, b) == doctest::Approx(20.0 * std::log10(255.0 / 16.0)).epsilon(1e-9));
        CHECK(psnr(a2, b) == doctest::Approx(24.0475).epsilon(1e-4));
    }

    SUBCASE("one pixel off by 1.0 in an N-pixel image") {
        Tensor zero = Tensor::zeros({16, 25});
        Tensor one = Tensor::zeros({16, 25});
        one[7] = 1.0;
        CHECK(psnr(zero, one) == doctest::Approx(10.0 * std::log10(400.0)).epsilon(1e-12));
    }

    SUBCASE("symmetry is exact") {
        Tensor b = oracle::random_tensor({20, 20}, rng, 0.0, 1.0);
        CHECK(psnr(a, b) == psnr(b, a));
    }

    SUBCASE("shape mismatch raises") {
        Tensor b({10, 10});
        CHECK_THROWS_AS(psnr(a, b), DimError);
    }
}

TEST_CASE("psnr strictly decreases along a noise ladder") {
    Rng rng(2);
    Tensor a = oracle::random_tensor({24, 24}, rng, 0.2, 0.8);
    double prev = kPsnrCap + 1.0;
    for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
        Rng noise(99); // same noise pattern scaled up
        Tensor b = a.clone();
        for (long i = 0; i < b.size(); ++i) b[i] += amp * noise.uniform(-1.0, 1.0);
        const double p = psnr(a, b);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim closed forms") {
    Rng rng(3);
    Tensor a = oracle::random_tensor({16, 20}, rng, 0.0, 1.0);

    SUBCASE("identical images score 1") {
        CHECK(ssim(a, a.clone()) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("constant images differ only in the luminance term") {
        const double mu_a = 0.4, mu_b = 0.5, c1 = 0.01 * 0.01;
        Tensor ca = Tensor::full({16, 16}, mu_a);
        Tensor cb = Tensor::full({16, 16}, mu_b);
        const double want = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
        CHECK(ssim(ca, cb) == doctest::Approx(want).epsilon(1e-9));
    }

    SUBCASE("window precondition") {
        Tensor small = Tensor::zeros({8, 20});
        CHECK_THROWS_AS(ssim(small, small.clone()), InputError);
    }

    SUBCASE("range stays within [-1, 1]") {
        Tensor inv = a.clone();
        for (long i = 0; i < inv.size(); ++i) inv[i] = 1.0 - inv[i];
        const double s = ssim(a, inv);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("ssim matches the brute-force oracle on 10 random pairs") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        Tensor a = oracle::random_tensor({14, 17}, rng, 0.0, 1.0);
        Tensor b = a.clone();
        for (long i = 0; i < b.size(); ++i) b[i] = std::clamp(b[i] + rng.uniform(-0.2, 0.2), 0.0, 1.0);
        CHECK(ssim(a, b) == doctest::Approx(oracle::brute_force_ssim(a, b)).epsilon(1e-8));
    }
}

TEST_CASE("color metrics average per-channel scores") {
    Rng rng(4);
    Tensor a = oracle::random_tensor({3, 16, 16}, rng, 0.0, 1.0);
    Tensor b = a.clone();
    for (long i = 0; i < 256; ++i) b[i] = std::clamp(b[i] + 0.05, 0.0, 1.0); // channel 0 only
    const long hw = 256;
    Tensor a0({16, 16}), b0({16, 16});
    for (long i = 0; i < hw; ++i) {
        a0[i] = a[i];
        b0[i] = b[i];
    }
    const double expected_psnr = (psnr(a0, b0) + kPsnrCap + kPsnrCap) / 3.0;
    CHECK(psnr(a, b) == doctest::Approx(expected_psnr).epsilon(1e-12));
    const double expected_ssim = (ssim(a0, b0) + 2.0) / 3.0;
    CHECK(ssim(a, b) == doctest::Approx(expected_ssim).epsilon(1e-9));
}

TEST_CASE("report serialization carries per-image rows") {
    Rng rng(5);
    Tensor a = oracle::random_tensor({12, 12}, rng, 0.0, 1.0);
    Tensor b = a.clone();
    b[0] += 0.1;
    MetricReport rep = evaluate_pairs({a, a.clone()}, {b, a.clone()});
    CHECK(rep.per_image.size() == 2);
    CHECK(rep.per_image[1].first == kPsnrCap);
    const std::string j = metric_report_json(rep);
    CHECK(j.find("\"psnr_db\"") != std::string::npos);
    const std::string c = metric_report_csv(rep);
    CHECK(c.find("index,psnr_db,ssim") != std::string::npos);
    CHECK(c.find("mean,") != std::string::npos);
}
