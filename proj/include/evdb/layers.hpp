#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evdb/ops.hpp"
#include "evdb/rng.hpp"
#include "evdb/tensor.hpp"

namespace evdb::nn {

// Ordered (name, leaf tensor) pairs; ordering is the canonical parameter
// order used by the optimizer and checkpoints.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

// Uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero bias.
Tensor init_uniform(std::vector<long> shape, long fan_in, Rng& rng);

struct Conv2d {
    Tensor w, b;
    long stride = 1;
    long pad = -1; // -1: keep spatial size ((k-1)/2)
    std::string name;

    Conv2d() = default;
    Conv2d(std::string name, long cin, long cout, long k, long stride, Rng& rng, long pad = -1);
    Tensor operator()(const Tensor& x) const { return ops::conv2d(x, w, b, stride, pad); }
    void params(NamedParams& out) const;
};

struct Linear {
    Tensor w, b;
    std::string name;

    Linear() = default;
    Linear(std::string name, long in, long out, Rng& rng);
    Tensor operator()(const Tensor& x) const { return ops::linear(x, w, b); }
    void params(NamedParams& out) const;
};

struct GroupNorm {
    Tensor gamma, beta;
    long groups = 1;
    double eps = 1e-5;
    std::string name;

    GroupNorm() = default;
    GroupNorm(std::string name, long channels, long groups, double eps = 1e-5);
    Tensor operator()(const Tensor& x) const {
        return ops::group_norm(x, groups, eps, gamma, beta);
    }
    void params(NamedParams& out) const;
};

// conv -> ReLU -> conv -> ReLU; stride applies to the first conv.
struct DoubleConv {
    Conv2d c1, c2;

    DoubleConv() = default;
    DoubleConv(const std::string& name, long cin, long cout, long stride, Rng& rng);
    Tensor operator()(const Tensor& x) const { return ops::relu(c2(ops::relu(c1(x)))); }
    void params(NamedParams& out) const;
};

} // namespace evdb::nn
