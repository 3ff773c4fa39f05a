#include "evdb/layers.hpp"

#include <cmath>

namespace evdb::nn {

Tensor init_uniform(std::vector<long> shape, long fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (long i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

Conv2d::Conv2d(std::string name_in, long cin, long cout, long k, long stride_in, Rng& rng,
               long pad_in)
    : stride(stride_in), pad(pad_in), name(std::move(name_in)) {
    w = Tensor::leaf_from(name + ".w", init_uniform({cout, cin, k, k}, cin * k * k, rng));
    b = Tensor::leaf_from(name + ".b", Tensor::zeros({cout}));
}

void Conv2d::params(NamedParams& out) const {
    out.emplace_back(name + ".w", w);
    out.emplace_back(name + ".b", b);
}

Linear::Linear(std::string name_in, long in, long out, Rng& rng) : name(std::move(name_in)) {
    w = Tensor::leaf_from(name + ".w", init_uniform({out, in}, in, rng));
    b = Tensor::leaf_from(name + ".b", Tensor::zeros({out}));
}

void Linear::params(NamedParams& out) const {
    out.emplace_back(name + ".w", w);
    out.emplace_back(name + ".b", b);
}

GroupNorm::GroupNorm(std::string name_in, long channels, long groups_in, double eps_in)
    : groups(groups_in), eps(eps_in), name(std::move(name_in)) {
    gamma = Tensor::leaf_from(name + ".gamma", Tensor::full({channels}, 1.0));
    beta = Tensor::leaf_from(name + ".beta", Tensor::zeros({channels}));
}

void GroupNorm::params(NamedParams& out) const {
    out.emplace_back(name + ".gamma", gamma);
    out.emplace_back(name + ".beta", beta);
}

DoubleConv::DoubleConv(const std::string& name, long cin, long cout, long stride, Rng& rng)
    : c1(name + ".c1", cin, cout, 3, stride, rng), c2(name + ".c2", cout, cout, 3, 1, rng) {}

void DoubleConv::params(NamedParams& out) const {
    c1.params(out);
    c2.params(out);
}

} // namespace evdb::nn
