#include "evdb/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "evdb/autograd.hpp"
#include "evdb/blas.hpp"
#include "evdb/errors.hpp"

namespace evdb::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw DimError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                       b.shape_str());
}

void require_rank(const Tensor& a, int rank, const char* op) {
    if (a.rank() != rank)
        throw DimError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                       a.shape_str());
}

} // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor y(a.shape());
    const long n = a.size();
    for (long i = 0; i < n; ++i) y[i] = a[i] + b[i];
    return ag::record("add", std::move(y), {a, b}, [](const Tensor& gy) {
        return std::vector<Tensor>{gy, gy};
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor y(a.shape());
    const long n = a.size();
    for (long i = 0; i < n; ++i) y[i] = a[i] - b[i];
    return ag::record("sub", std::move(y), {a, b}, [](const Tensor& gy) {
        Tensor gb(gy.shape());
        for (long i = 0; i < gy.size(); ++i) gb[i] = -gy[i];
        return std::vector<Tensor>{gy, std::move(gb)};
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor y(a.shape());
    const long n = a.size();
    for (long i = 0; i < n; ++i) y[i] = a[i] * b[i];
    Tensor a_saved = a.detach(), b_saved = b.detach();
    return ag::record("mul", std::move(y), {a, b}, [a_saved, b_saved](const Tensor& gy) {
        Tensor ga(gy.shape()), gb(gy.shape());
        for (long i = 0; i < gy.size(); ++i) {
            ga[i] = gy[i] * b_saved[i];
            gb[i] = gy[i] * a_saved[i];
        }
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    });
}

Tensor add_scalar(const Tensor& a, double s) {
    Tensor y(a.shape());
    for (long i = 0; i < a.size(); ++i) y[i] = a[i] + s;
    return ag::record("add_scalar", std::move(y), {a}, [](const Tensor& gy) {
        return std::vector<Tensor>{gy};
    });
}

Tensor mul_scalar(const Tensor& a, double s) {
    Tensor y(a.shape());
    for (long i = 0; i < a.size(); ++i) y[i] = a[i] * s;
    return ag::record("mul_scalar", std::move(y), {a}, [s](const Tensor& gy) {
        Tensor ga(gy.shape());
        for (long i = 0; i < gy.size(); ++i) ga[i] = gy[i] * s;
        return std::vector<Tensor>{std::move(ga)};
    });
}

Tensor relu(const Tensor& a) {
    Tensor y(a.shape());
    for (long i = 0; i < a.size(); ++i) y[i] = a[i] > 0.0 ? a[i] : 0.0;
    Tensor a_saved = a.detach();
    return ag::record("relu", std::move(y), {a}, [a_saved](const Tensor& gy) {
        Tensor ga(gy.shape());
        for (long i = 0; i < gy.size(); ++i) ga[i] = a_saved[i] > 0.0 ? gy[i] : 0.0;
        return std::vector<Tensor>{std::move(ga)};
    });
}

Tensor sigmoid(const Tensor& a) {
    Tensor y(a.shape());
    for (long i = 0; i < a.size(); ++i) {
        const double v = a[i];
        y[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    Tensor y_saved = y.detach();
    return ag::record("sigmoid", std::move(y), {a}, [y_saved](const Tensor& gy) {
        Tensor ga(gy.shape());
        for (long i = 0; i < gy.size(); ++i) ga[i] = gy[i] * y_saved[i] * (1.0 - y_saved[i]);
        return std::vector<Tensor>{std::move(ga)};
    });
}

// ---------------------------------------------------------------- reductions

Tensor sum_all(const Tensor& a) {
    Tensor y = Tensor::scalar(a.sum());
    std::vector<long> shape = a.shape();
    return ag::record("sum_all", std::move(y), {a}, [shape](const Tensor& gy) {
        return std::vector<Tensor>{Tensor::full(shape, gy[0])};
    });
}

Tensor mean_all(const Tensor& a) {
    const double n = static_cast<double>(a.size());
    Tensor y = Tensor::scalar(a.sum() / n);
    std::vector<long> shape = a.shape();
    return ag::record("mean_all", std::move(y), {a}, [shape, n](const Tensor& gy) {
        return std::vector<Tensor>{Tensor::full(shape, gy[0] / n)};
    });
}

Tensor gap(const Tensor& a) {
    require_rank(a, 4, "gap");
    const long n = a.dim(0), c = a.dim(1), h = a.dim(2), w = a.dim(3);
    if (h < 1 || w < 1) throw DimError("gap: empty spatial dims");
    const long hw = h * w;
    Tensor y({n, c, 1, 1});
    for (long i = 0; i < n * c; ++i) {
        const double* src = a.data() + i * hw;
        double s = 0.0;
        for (long j = 0; j < hw; ++j) s += src[j];
        y[i] = s / static_cast<double>(hw);
    }
    std::vector<long> shape = a.shape();
    return ag::record("gap", std::move(y), {a}, [shape, hw](const Tensor& gy) {
        Tensor ga(shape);
        for (long i = 0; i < gy.size(); ++i) {
            double* dst = ga.data() + i * hw;
            const double g = gy[i] / static_cast<double>(hw);
            for (long j = 0; j < hw; ++j) dst[j] = g;
        }
        return std::vector<Tensor>{std::move(ga)};
    });
}

Tensor mean_batch(const Tensor& a) {
    require_rank(a, 4, "mean_batch");
    const long n = a.dim(0), chw = a.size() / a.dim(0);
    Tensor y({1, a.dim(1), a.dim(2), a.dim(3)});
    for (long i = 0; i < chw; ++i) {
        double s = 0.0;
        for (long b = 0; b < n; ++b) s += a[b * chw + i];
        y[i] = s / static_cast<double>(n);
    }
    std::vector<long> shape = a.shape();
    return ag::record("mean_batch", std::move(y), {a}, [shape, n, chw](const Tensor& gy) {
        Tensor ga(shape);
        for (long b = 0; b < n; ++b)
            for (long i = 0; i < chw; ++i) ga[b * chw + i] = gy[i] / static_cast<double>(n);
        return std::vector<Tensor>{std::move(ga)};
    });
}

// ---------------------------------------------------------------- shape

Tensor reshape(const Tensor& a, std::vector<long> shape) {
    Tensor y = a.reshaped_view(shape).clone();
    std::vector<long> orig = a.shape();
    return ag::record("reshape", std::move(y), {a}, [orig](const Tensor& gy) {
        return std::vector<Tensor>{gy.reshaped_view(orig)};
    });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank(a, 4, "concat_channels");
    require_rank(b, 4, "concat_channels");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw DimError("concat_channels: incompatible shapes " + a.shape_str() + " vs " +
                       b.shape_str());
    const long n = a.dim(0), ca = a.dim(1), cb = b.dim(1), hw = a.dim(2) * a.dim(3);
    Tensor y({n, ca + cb, a.dim(2), a.dim(3)});
    for (long i = 0; i < n; ++i) {
        std::memcpy(y.data() + (i * (ca + cb)) * hw, a.data() + i * ca * hw,
                    static_cast<size_t>(ca * hw) * sizeof(double));
        std::memcpy(y.data() + (i * (ca + cb) + ca) * hw, b.data() + i * cb * hw,
                    static_cast<size_t>(cb * hw) * sizeof(double));
    }
    std::vector<long> sa = a.shape(), sb = b.shape();
    return ag::record("concat_channels", std::move(y), {a, b},
                      [sa, sb, n, ca, cb, hw](const Tensor& gy) {
                          Tensor ga(sa), gb(sb);
                          for (long i = 0; i < n; ++i) {
                              std::memcpy(ga.data() + i * ca * hw,
                                          gy.data() + (i * (ca + cb)) * hw,
                                          static_cast<size_t>(ca * hw) * sizeof(double));
                              std::memcpy(gb.data() + i * cb * hw,
                                          gy.data() + (i * (ca + cb) + ca) * hw,
                                          static_cast<size_t>(cb * hw) * sizeof(double));
                          }
                          return std::vector<Tensor>{std::move(ga), std::move(gb)};
                      });
}

Tensor stack_batch(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimError("stack_batch: no inputs");
    std::vector<long> base;
    for (const Tensor& p : parts) {
        std::vector<long> s = p.shape();
        if (p.rank() == 4) {
            if (p.dim(0) != 1) throw DimError("stack_batch: parts must have batch 1");
            s.erase(s.begin());
        }
        if (base.empty())
            base = s;
        else if (s != base)
            throw DimError("stack_batch: mismatched part shapes");
    }
    const long k = static_cast<long>(parts.size());
    const long chw = shape_product(base);
    Tensor y({k, base[0], base[1], base[2]});
    for (long i = 0; i < k; ++i)
        std::memcpy(y.data() + i * chw, parts[i].data(),
                    static_cast<size_t>(chw) * sizeof(double));
    std::vector<std::vector<long>> shapes;
    for (const Tensor& p : parts) shapes.push_back(p.shape());
    return ag::record("stack_batch", std::move(y), parts, [shapes, chw](const Tensor& gy) {
        std::vector<Tensor> grads;
        for (size_t i = 0; i < shapes.size(); ++i) {
            Tensor g(shapes[i]);
            std::memcpy(g.data(), gy.data() + static_cast<long>(i) * chw,
                        static_cast<size_t>(chw) * sizeof(double));
            grads.push_back(std::move(g));
        }
        return grads;
    });
}

Tensor repeat_batch(const Tensor& a, long t) {
    require_rank(a, 4, "repeat_batch");
    if (a.dim(0) != 1) throw DimError("repeat_batch: batch dim must be 1");
    if (t < 1) throw ConfigError("repeat_batch: t must be >= 1");
    const long chw = a.size();
    Tensor y({t, a.dim(1), a.dim(2), a.dim(3)});
    for (long i = 0; i < t; ++i)
        std::memcpy(y.data() + i * chw, a.data(), static_cast<size_t>(chw) * sizeof(double));
    std::vector<long> shape = a.shape();
    return ag::record("repeat_batch", std::move(y), {a}, [shape, t, chw](const Tensor& gy) {
        Tensor ga(shape);
        for (long i = 0; i < t; ++i)
            for (long j = 0; j < chw; ++j) ga[j] += gy[i * chw + j];
        return std::vector<Tensor>{std::move(ga)};
    });
}

Tensor repeat_channels(const Tensor& a, long r) {
    require_rank(a, 4, "repeat_channels");
    if (r < 1) throw ConfigError("repeat_channels: r must be >= 1");
    const long n = a.dim(0), c = a.dim(1), hw = a.dim(2) * a.dim(3);
    Tensor y({n, c * r, a.dim(2), a.dim(3)});
    for (long b = 0; b < n; ++b)
        for (long ch = 0; ch < c; ++ch)
            for (long j = 0; j < r; ++j)
                std::memcpy(y.data() + ((b * c * r) + ch * r + j) * hw,
                            a.data() + (b * c + ch) * hw,
                            static_cast<size_t>(hw) * sizeof(double));
    std::vector<long> shape = a.shape();
    return ag::record("repeat_channels", std::move(y), {a},
                      [shape, n, c, r, hw](const Tensor& gy) {
                          Tensor ga(shape);
                          for (long b = 0; b < n; ++b)
                              for (long ch = 0; ch < c; ++ch) {
                                  double* dst = ga.data() + (b * c + ch) * hw;
                                  for (long j = 0; j < r; ++j) {
                                      const double* src =
                                          gy.data() + ((b * c * r) + ch * r + j) * hw;
                                      for (long i = 0; i < hw; ++i) dst[i] += src[i];
                                  }
                              }
                          return std::vector<Tensor>{std::move(ga)};
                      });
}

// ---------------------------------------------------------------- broadcast

Tensor scale_channels(const Tensor& x, const Tensor& z) {
    require_rank(x, 4, "scale_channels");
    require_rank(z, 4, "scale_channels");
    if (z.dim(0) != x.dim(0) || z.dim(1) != x.dim(1) || z.dim(2) != 1 || z.dim(3) != 1)
        throw DimError("scale_channels: scale must be [N,C,1,1] matching " + x.shape_str());
    const long nc = x.dim(0) * x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor y(x.shape());
    for (long i = 0; i < nc; ++i) {
        const double s = z[i];
        const double* src = x.data() + i * hw;
        double* dst = y.data() + i * hw;
        for (long j = 0; j < hw; ++j) dst[j] = src[j] * s;
    }
    Tensor xs = x.detach(), zs = z.detach();
    return ag::record("scale_channels", std::move(y), {x, z}, [xs, zs, nc, hw](const Tensor& gy) {
        Tensor gx(xs.shape()), gz(zs.shape());
        for (long i = 0; i < nc; ++i) {
            const double s = zs[i];
            const double* g = gy.data() + i * hw;
            const double* xv = xs.data() + i * hw;
            double* gxp = gx.data() + i * hw;
            double acc = 0.0;
            for (long j = 0; j < hw; ++j) {
                gxp[j] = g[j] * s;
                acc += g[j] * xv[j];
            }
            gz[i] = acc;
        }
        return std::vector<Tensor>{std::move(gx), std::move(gz)};
    });
}

Tensor mul_plane(const Tensor& x, const Tensor& m) {
    require_rank(x, 4, "mul_plane");
    require_rank(m, 4, "mul_plane");
    if (m.dim(0) != x.dim(0) || m.dim(1) != 1 || m.dim(2) != x.dim(2) || m.dim(3) != x.dim(3))
        throw DimError("mul_plane: mask must be [N,1,H,W] matching " + x.shape_str());
    const long n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor y(x.shape());
    for (long b = 0; b < n; ++b) {
        const double* mk = m.data() + b * hw;
        for (long ch = 0; ch < c; ++ch) {
            const double* src = x.data() + (b * c + ch) * hw;
            double* dst = y.data() + (b * c + ch) * hw;
            for (long j = 0; j < hw; ++j) dst[j] = src[j] * mk[j];
        }
    }
    Tensor xs = x.detach(), ms = m.detach();
    return ag::record("mul_plane", std::move(y), {x, m}, [xs, ms, n, c, hw](const Tensor& gy) {
        Tensor gx(xs.shape()), gm(ms.shape());
        for (long b = 0; b < n; ++b) {
            const double* mk = ms.data() + b * hw;
            double* gmp = gm.data() + b * hw;
            for (long ch = 0; ch < c; ++ch) {
                const double* g = gy.data() + (b * c + ch) * hw;
                const double* xv = xs.data() + (b * c + ch) * hw;
                double* gxp = gx.data() + (b * c + ch) * hw;
                for (long j = 0; j < hw; ++j) {
                    gxp[j] = g[j] * mk[j];
                    gmp[j] += g[j] * xv[j];
                }
            }
        }
        return std::vector<Tensor>{std::move(gx), std::move(gm)};
    });
}

Tensor add_broadcast_batch(const Tensor& x, const Tensor& b) {
    require_rank(x, 4, "add_broadcast_batch");
    require_rank(b, 4, "add_broadcast_batch");
    if (b.dim(0) != 1 || b.dim(1) != x.dim(1) || b.dim(2) != x.dim(2) || b.dim(3) != x.dim(3))
        throw DimError("add_broadcast_batch: addend must be [1,C,H,W] matching " + x.shape_str());
    const long n = x.dim(0), chw = b.size();
    Tensor y(x.shape());
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < chw; ++j) y[i * chw + j] = x[i * chw + j] + b[j];
    std::vector<long> bs = b.shape();
    return ag::record("add_broadcast_batch", std::move(y), {x, b},
                      [bs, n, chw](const Tensor& gy) {
                          Tensor gb(bs);
                          for (long i = 0; i < n; ++i)
                              for (long j = 0; j < chw; ++j) gb[j] += gy[i * chw + j];
                          return std::vector<Tensor>{gy, std::move(gb)};
                      });
}

// ---------------------------------------------------------------- clamp

Tensor clamp01(const Tensor& x) {
    Tensor y(x.shape());
    for (long i = 0; i < x.size(); ++i) y[i] = std::clamp(x[i], 0.0, 1.0);
    return y; // evaluation-time only: no gradient is recorded
}

} // namespace evdb::ops
