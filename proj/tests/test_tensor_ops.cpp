#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evdb/errors.hpp"
#include "evdb/ops.hpp"
#include "evdb/rng.hpp"
#include "evdb/tensor.hpp"
#include "oracles.hpp"

using evdb::Rng;
using evdb::Tensor;
namespace ops = evdb::ops;

TEST_CASE("tensor basics and invariants") {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.shape_str() == "[2,3]");
    CHECK(t.sum() == doctest::Approx(21.0));
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0}), evdb::DimError);
    CHECK_THROWS_AS(Tensor({0, 3}), evdb::DimError);

    Tensor shallow = t;
    shallow[0] = 9.0;
    CHECK(t[0] == 9.0); // copies share storage
    Tensor deep = t.clone();
    deep[0] = 1.0;
    CHECK(t[0] == 9.0);
}

TEST_CASE("non-finite outputs raise") {
    Tensor big = Tensor::full({2, 2}, 1e308);
    CHECK_THROWS_AS(ops::mul(big, big), evdb::NumericError);
    Tensor neg = Tensor::full({2, 2}, -1.0);
    CHECK_NOTHROW(ops::relu(neg));
}

TEST_CASE("conv2d identity kernel") {
    Rng rng(1);
    Tensor x = oracle::random_tensor({1, 3, 3}, rng);
    Tensor w = Tensor::from({1, 1, 1, 1}, {1.0});
    Tensor y = ops::conv2d(x, w, Tensor(), 1);
    for (long i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-15));
}

TEST_CASE("conv2d all-ones kernel on constant input") {
    // constant 5 input, 3x3 ones kernel, zero pad: full footprints sum to 45,
    // corner footprints cover 2x2 -> 20
    Tensor x = Tensor::full({1, 4, 4}, 5.0);
    Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor y = ops::conv2d(x, w, Tensor(), 1);
    CHECK(y.at(0, 1, 1) == doctest::Approx(45.0));
    CHECK(y.at(0, 1, 2) == doctest::Approx(45.0));
    CHECK(y.at(0, 2, 2) == doctest::Approx(45.0));
    CHECK(y.at(0, 0, 0) == doctest::Approx(20.0));
    CHECK(y.at(0, 0, 3) == doctest::Approx(20.0));
    CHECK(y.at(0, 3, 3) == doctest::Approx(20.0));
}

TEST_CASE("conv2d zero kernel annihilates") {
    Rng rng(2);
    Tensor x = oracle::random_tensor({2, 5, 5}, rng);
    Tensor w = Tensor::zeros({3, 2, 3, 3});
    Tensor y = ops::conv2d(x, w, Tensor(), 1);
    CHECK(y.max() == 0.0);
    CHECK(y.min() == 0.0);
}

TEST_CASE("conv2d matches the naive oracle") {
    Rng rng(3);
    for (long stride : {1L, 2L}) {
        Tensor x = oracle::random_tensor({3, 8, 7}, rng);
        Tensor w = oracle::random_tensor({4, 3, 3, 3}, rng);
        Tensor b = oracle::random_tensor({4}, rng);
        Tensor got = ops::conv2d(x, w, b, stride);
        Tensor want = oracle::naive_conv2d(x, w, b, stride, -1);
        REQUIRE(got.same_shape(want));
        for (long i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d batched equals per-sample") {
    Rng rng(4);
    Tensor x = oracle::random_tensor({3, 2, 6, 6}, rng);
    Tensor w = oracle::random_tensor({4, 2, 3, 3}, rng);
    Tensor b = oracle::random_tensor({4}, rng);
    Tensor y = ops::conv2d(x, w, b, 1);
    for (long n = 0; n < 3; ++n) {
        Tensor xn({2, 6, 6});
        for (long i = 0; i < xn.size(); ++i) xn[i] = x[n * xn.size() + i];
        Tensor yn = oracle::naive_conv2d(xn, w, b, 1, -1);
        for (long i = 0; i < yn.size(); ++i)
            CHECK(y[n * yn.size() + i] == doctest::Approx(yn[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d linearity") {
    Rng rng(5);
    Tensor x = oracle::random_tensor({1, 2, 6, 6}, rng);
    Tensor y = oracle::random_tensor({1, 2, 6, 6}, rng);
    Tensor w = oracle::random_tensor({3, 2, 3, 3}, rng);
    const double a = 1.7, b = -0.6;
    Tensor lhs = ops::conv2d(ops::add(ops::mul_scalar(x, a), ops::mul_scalar(y, b)), w, Tensor(), 1);
    Tensor rhs = ops::add(ops::mul_scalar(ops::conv2d(x, w, Tensor(), 1), a),
                          ops::mul_scalar(ops::conv2d(y, w, Tensor(), 1), b));
    for (long i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-10);
}

TEST_CASE("conv2d shape errors") {
    Tensor x({2, 4, 4});
    Tensor w({1, 3, 3, 3}); // channel mismatch
    CHECK_THROWS_AS(ops::conv2d(x, w, Tensor(), 1), evdb::DimError);
    Tensor weven({1, 2, 2, 2});
    CHECK_THROWS_AS(ops::conv2d(x, weven, Tensor(), 1), evdb::DimError);
}

TEST_CASE("group_norm constant input is zero pre-affine") {
    Tensor x = Tensor::full({1, 4, 3, 3}, 2.5);
    Tensor y = ops::group_norm(x, 2, 1e-5, Tensor(), Tensor());
    for (long i = 0; i < y.size(); ++i) CHECK(std::abs(y[i]) < 1e-12);
}

TEST_CASE("group_norm of a +-1 pattern") {
    // one group, values {-1, +1}: already zero-mean unit-variance, so the
    // output equals the input up to the eps floor
    Tensor x({1, 2, 1, 2});
    x[0] = -1.0;
    x[1] = 1.0;
    x[2] = 1.0;
    x[3] = -1.0;
    Tensor y = ops::group_norm(x, 1, 1e-8, Tensor(), Tensor());
    for (long i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-6));
}

TEST_CASE("group_norm with groups == C matches instance-norm oracle") {
    Rng rng(6);
    Tensor x = oracle::random_tensor({2, 4, 5, 5}, rng);
    Tensor got = ops::group_norm(x, 4, 1e-5, Tensor(), Tensor());
    Tensor want = oracle::naive_instance_norm(x, 1e-5);
    for (long i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("group_norm rejects bad group counts") {
    Tensor x({1, 6, 2, 2});
    CHECK_THROWS_AS(ops::group_norm(x, 4, 1e-5, Tensor(), Tensor()), evdb::ConfigError);
}

TEST_CASE("group_norm affine identity at init") {
    Rng rng(7);
    Tensor x = oracle::random_tensor({1, 4, 4, 4}, rng);
    Tensor gamma = Tensor::full({4}, 1.0), beta = Tensor::zeros({4});
    Tensor plain = ops::group_norm(x, 2, 1e-5, Tensor(), Tensor());
    Tensor affine = ops::group_norm(x, 2, 1e-5, gamma, beta);
    for (long i = 0; i < plain.size(); ++i) CHECK(plain[i] == affine[i]);
}

TEST_CASE("gap examples and mass preservation") {
    Tensor c = Tensor::full({1, 3, 4, 4}, 0.7);
    Tensor yc = ops::gap(c);
    for (long i = 0; i < yc.size(); ++i) CHECK(yc[i] == doctest::Approx(0.7));

    Tensor x = Tensor::from({1, 1, 2, 2}, {1, 2, 3, 4});
    CHECK(ops::gap(x)[0] == doctest::Approx(2.5));

    Rng rng(8);
    Tensor r = oracle::random_tensor({2, 3, 6, 5}, rng);
    Tensor g = ops::gap(r);
    // brute-force mean per (n, c) and total mass
    double mass = 0.0;
    for (long n = 0; n < 2; ++n)
        for (long ch = 0; ch < 3; ++ch) {
            double s = 0.0;
            for (long i = 0; i < 30; ++i) s += r[(n * 3 + ch) * 30 + i];
            CHECK(g[n * 3 + ch] == doctest::Approx(s / 30.0).epsilon(1e-12));
            mass += g[n * 3 + ch] * 30.0;
        }
    CHECK(std::abs(mass - r.sum()) < 1e-10);
}

TEST_CASE("dynamic_conv delta kernels are the identity") {
    Rng rng(9);
    const long k = 5, c = 2, h = 6, w = 6;
    Tensor x = oracle::random_tensor({c, h, w}, rng);
    Tensor kern = Tensor::zeros({c * k * k, h, w});
    const long center = (k / 2) * k + k / 2;
    for (long ch = 0; ch < c; ++ch)
        for (long i = 0; i < h * w; ++i) kern[(ch * k * k + center) * h * w + i] = 1.0;
    Tensor y = ops::dynamic_conv(x, kern, k);
    for (long i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]); // exact
}

TEST_CASE("dynamic_conv uniform kernels equal a box filter") {
    Rng rng(10);
    const long k = 3, c = 2, h = 7, w = 7;
    Tensor x = oracle::random_tensor({c, h, w}, rng);
    Tensor kern = Tensor::full({c * k * k, h, w}, 1.0 / (k * k));
    Tensor got = ops::dynamic_conv(x, kern, k);
    // depthwise box filter via conv2d
    Tensor wbox = Tensor::zeros({c, c, k, k});
    for (long ch = 0; ch < c; ++ch)
        for (long i = 0; i < k * k; ++i) wbox[((ch * c + ch) * k * k) + i] = 1.0 / (k * k);
    Tensor want = ops::conv2d(x, wbox, Tensor(), 1);
    for (long i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("dynamic_conv zero kernels annihilate and shapes are checked") {
    Rng rng(11);
    Tensor x = oracle::random_tensor({2, 4, 4}, rng);
    Tensor zero = Tensor::zeros({2 * 9, 4, 4});
    Tensor y = ops::dynamic_conv(x, zero, 3);
    CHECK(y.max() == 0.0);
    Tensor bad = Tensor::zeros({2 * 9 + 1, 4, 4});
    CHECK_THROWS_AS(ops::dynamic_conv(x, bad, 3), evdb::DimError);
}

TEST_CASE("upsample2x doubles size and preserves constants") {
    Tensor x = Tensor::full({1, 2, 3, 5}, 0.4);
    Tensor y = ops::upsample2x(x);
    CHECK(y.shape() == std::vector<long>{1, 2, 6, 10});
    for (long i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(0.4));
}

TEST_CASE("avg_pool2x averages 2x2 blocks") {
    Tensor x = Tensor::from({1, 1, 2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
    Tensor y = ops::avg_pool2x(x);
    CHECK(y.shape() == std::vector<long>{1, 1, 1, 2});
    CHECK(y[0] == doctest::Approx((1 + 2 + 5 + 6) / 4.0));
    CHECK(y[1] == doctest::Approx((3 + 4 + 7 + 8) / 4.0));
}

TEST_CASE("channel_mean_max") {
    Tensor x = Tensor::from({1, 3, 1, 2}, {1, 4, 2, 2, 3, 0});
    Tensor y = ops::channel_mean_max(x);
    CHECK(y[0] == doctest::Approx(2.0));  // mean of 1,2,3
    CHECK(y[1] == doctest::Approx(2.0));  // mean of 4,2,0
    CHECK(y[2] == doctest::Approx(3.0));  // max 3
    CHECK(y[3] == doctest::Approx(4.0));  // max 4
}

TEST_CASE("repeat and broadcast ops") {
    Rng rng(12);
    Tensor x = oracle::random_tensor({1, 2, 2, 2}, rng);
    Tensor r = ops::repeat_batch(x, 3);
    CHECK(r.shape() == std::vector<long>{3, 2, 2, 2});
    for (long t = 0; t < 3; ++t)
        for (long i = 0; i < x.size(); ++i) CHECK(r[t * x.size() + i] == x[i]);

    Tensor rc = ops::repeat_channels(x, 2);
    CHECK(rc.shape() == std::vector<long>{1, 4, 2, 2});
    // channel c of the output equals channel c/2 of the input
    for (long c = 0; c < 4; ++c)
        for (long i = 0; i < 4; ++i) CHECK(rc[c * 4 + i] == x[(c / 2) * 4 + i]);

    Tensor z = Tensor::from({1, 2, 1, 1}, {2.0, -1.0});
    Tensor sc = ops::scale_channels(x, z);
    for (long i = 0; i < 4; ++i) {
        CHECK(sc[i] == doctest::Approx(2.0 * x[i]));
        CHECK(sc[4 + i] == doctest::Approx(-x[4 + i]));
    }
}

TEST_CASE("charbonnier loss closed forms") {
    const double eps = 1e-3;
    Tensor a = Tensor::full({2, 2}, 0.5);
    Tensor same = ops::charbonnier(a, a.clone(), eps);
    CHECK(same[0] == doctest::Approx(eps).epsilon(1e-12));

    Tensor b = Tensor::full({2, 2}, -0.5); // uniform difference of 1
    Tensor one = ops::charbonnier(a, b, eps);
    CHECK(one[0] == doctest::Approx(std::sqrt(1.0 + eps * eps)).epsilon(1e-12));
}
