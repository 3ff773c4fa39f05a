#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "evdb/autograd.hpp"
#include "evdb/blas.hpp"
#include "evdb/errors.hpp"
#include "evdb/ops.hpp"

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

// Unpack [Cin,H,W] or [N,Cin,H,W] into 4-D dims; returns true if 3-D input.
bool as_batched(const Tensor& x, long& n, long& c, long& h, long& w, const char* op) {
    if (x.rank() == 3) {
        n = 1;
        c = x.dim(0);
        h = x.dim(1);
        w = x.dim(2);
        return true;
    }
    if (x.rank() == 4) {
        n = x.dim(0);
        c = x.dim(1);
        h = x.dim(2);
        w = x.dim(3);
        return false;
    }
    throw DimError(std::string(op) + ": expected rank 3 or 4 input, got " + x.shape_str());
}

// cols layout: [Cin*k*k rows, N*Ho*Wo columns], sample n in columns
// [n*Ho*Wo, (n+1)*Ho*Wo).
void im2col(const double* x, long n_count, long cin, long h, long w, long k, long stride,
            long pad, long ho, long wo, double* cols) {
    const long howo = ho * wo;
    const long row_stride = n_count * howo;
    for (long ci = 0; ci < cin; ++ci) {
        for (long ky = 0; ky < k; ++ky) {
            for (long kx = 0; kx < k; ++kx) {
                const long row = (ci * k + ky) * k + kx;
                for (long n = 0; n < n_count; ++n) {
                    const double* xc = x + (n * cin + ci) * h * w;
                    double* dst = cols + row * row_stride + n * howo;
                    for (long oy = 0; oy < ho; ++oy, dst += wo) {
                        const long iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= h) {
                            std::memset(dst, 0, static_cast<size_t>(wo) * sizeof(double));
                            continue;
                        }
                        const double* xrow = xc + iy * w;
                        for (long ox = 0; ox < wo; ++ox) {
                            const long ix = ox * stride - pad + kx;
                            dst[ox] = (ix >= 0 && ix < w) ? xrow[ix] : 0.0;
                        }
                    }
                }
            }
        }
    }
}

void col2im(const double* cols_n, long cin, long h, long w, long k, long stride, long pad,
            long ho, long wo, double* gx_n) {
    for (long ci = 0; ci < cin; ++ci) {
        for (long ky = 0; ky < k; ++ky) {
            for (long kx = 0; kx < k; ++kx) {
                const long row = (ci * k + ky) * k + kx;
                const double* src = cols_n + row * ho * wo;
                double* gc = gx_n + ci * h * w;
                for (long oy = 0; oy < ho; ++oy) {
                    const long iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    double* grow = gc + iy * w;
                    const double* srow = src + oy * wo;
                    for (long ox = 0; ox < wo; ++ox) {
                        const long ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) grow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

} // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, long stride, long pad) {
    long n, cin, h, wd;
    const bool squeeze = as_batched(x, n, cin, h, wd, "conv2d");
    require_rank(w, 4, "conv2d weights");
    const long cout = w.dim(0), k = w.dim(2);
    if (w.dim(2) != w.dim(3)) throw DimError("conv2d: kernel must be square, got " + w.shape_str());
    if (k % 2 == 0) throw DimError("conv2d: kernel size must be odd");
    if (w.dim(1) != cin)
        throw DimError("conv2d: input channels " + std::to_string(cin) + " vs kernel " +
                       w.shape_str());
    if (b.defined() && (b.rank() != 1 || b.dim(0) != cout))
        throw DimError("conv2d: bias must be [Cout]");
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (pad < 0) pad = (k - 1) / 2;

    const long ho = (h + 2 * pad - k) / stride + 1;
    const long wo = (wd + 2 * pad - k) / stride + 1;
    if (ho < 1 || wo < 1) throw DimError("conv2d: output would be empty");
    const long howo = ho * wo;
    const long cikk = cin * k * k;

    Tensor cols({cikk, n * howo});
    im2col(x.data(), n, cin, h, wd, k, stride, pad, ho, wo, cols.data());

    Tensor y = squeeze ? Tensor({cout, ho, wo}) : Tensor({n, cout, ho, wo});
    for (long i = 0; i < n; ++i) {
        blas::dgemm(false, false, cout, howo, cikk, 1.0, w.data(), cikk,
                    cols.data() + i * howo, n * howo, 0.0, y.data() + i * cout * howo, howo);
    }
    if (b.defined()) {
        for (long i = 0; i < n; ++i)
            for (long co = 0; co < cout; ++co) {
                double* dst = y.data() + (i * cout + co) * howo;
                const double bv = b[co];
                for (long s = 0; s < howo; ++s) dst[s] += bv;
            }
    }

    Tensor w_saved = w.detach();
    Tensor cols_saved = cols.detach();
    std::vector<long> x_shape = x.shape();
    const bool has_bias = b.defined();
    auto vjp = [=](const Tensor& gy) {
        std::vector<Tensor> grads(has_bias ? 3 : 2);
        // weights
        Tensor gw({cout, cin, k, k});
        for (long i = 0; i < n; ++i) {
            blas::dgemm(false, true, cout, cikk, howo, 1.0, gy.data() + i * cout * howo, howo,
                        cols_saved.data() + i * howo, n * howo, 1.0, gw.data(), cikk);
        }
        grads[1] = std::move(gw);
        // bias
        if (has_bias) {
            Tensor gb({cout});
            for (long i = 0; i < n; ++i)
                for (long co = 0; co < cout; ++co) {
                    const double* src = gy.data() + (i * cout + co) * howo;
                    double s = 0.0;
                    for (long j = 0; j < howo; ++j) s += src[j];
                    gb[co] += s;
                }
            grads[2] = std::move(gb);
        }
        // input
        Tensor gx(x_shape);
        std::vector<double> gcols(static_cast<size_t>(cikk * howo));
        for (long i = 0; i < n; ++i) {
            blas::dgemm(true, false, cikk, howo, cout, 1.0, w_saved.data(), cikk,
                        gy.data() + i * cout * howo, howo, 0.0, gcols.data(), howo);
            col2im(gcols.data(), cin, h, wd, k, stride, pad, ho, wo,
                   gx.data() + i * cin * h * wd);
        }
        grads[0] = std::move(gx);
        return grads;
    };

    std::vector<Tensor> inputs = has_bias ? std::vector<Tensor>{x, w, b} : std::vector<Tensor>{x, w};
    return ag::record("conv2d", std::move(y), std::move(inputs), std::move(vjp));
}

Tensor group_norm(const Tensor& x, long groups, double eps, const Tensor& gamma,
                  const Tensor& beta) {
    require_rank(x, 4, "group_norm");
    const long n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (groups < 1 || c % groups != 0)
        throw ConfigError("group_norm: groups " + std::to_string(groups) +
                          " does not divide channels " + std::to_string(c));
    const bool affine = gamma.defined();
    if (affine && (gamma.rank() != 1 || gamma.dim(0) != c || !beta.defined() ||
                   beta.rank() != 1 || beta.dim(0) != c))
        throw DimError("group_norm: gamma/beta must be [C]");
    const long cs = c / groups;     // channels per group
    const long m = cs * hw;         // elements per (sample, group)

    Tensor xhat(x.shape());
    Tensor ivar({n, groups});
    for (long b = 0; b < n; ++b) {
        for (long g = 0; g < groups; ++g) {
            const double* src = x.data() + (b * c + g * cs) * hw;
            double mean = 0.0;
            for (long i = 0; i < m; ++i) mean += src[i];
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (long i = 0; i < m; ++i) {
                const double d = src[i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(m);
            const double iv = 1.0 / std::sqrt(var + eps);
            ivar[b * groups + g] = iv;
            double* dst = xhat.data() + (b * c + g * cs) * hw;
            for (long i = 0; i < m; ++i) dst[i] = (src[i] - mean) * iv;
        }
    }

    Tensor y(x.shape());
    if (affine) {
        for (long b = 0; b < n; ++b)
            for (long ch = 0; ch < c; ++ch) {
                const double* src = xhat.data() + (b * c + ch) * hw;
                double* dst = y.data() + (b * c + ch) * hw;
                const double ga = gamma[ch], be = beta[ch];
                for (long i = 0; i < hw; ++i) dst[i] = ga * src[i] + be;
            }
    } else {
        std::memcpy(y.data(), xhat.data(), static_cast<size_t>(y.size()) * sizeof(double));
    }

    Tensor xhat_s = xhat.detach(), ivar_s = ivar.detach();
    Tensor gamma_s = affine ? gamma.detach() : Tensor();
    std::vector<long> xshape = x.shape();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx(xshape);
        Tensor ggamma, gbeta;
        if (affine) {
            ggamma = Tensor({c});
            gbeta = Tensor({c});
            for (long b = 0; b < n; ++b)
                for (long ch = 0; ch < c; ++ch) {
                    const double* g = gy.data() + (b * c + ch) * hw;
                    const double* xh = xhat_s.data() + (b * c + ch) * hw;
                    double sg = 0.0, sb = 0.0;
                    for (long i = 0; i < hw; ++i) {
                        sg += g[i] * xh[i];
                        sb += g[i];
                    }
                    ggamma[ch] += sg;
                    gbeta[ch] += sb;
                }
        }
        for (long b = 0; b < n; ++b) {
            for (long g = 0; g < groups; ++g) {
                const long base = (b * c + g * cs) * hw;
                const double iv = ivar_s[b * groups + g];
                double sum1 = 0.0, sum2 = 0.0;
                for (long i = 0; i < m; ++i) {
                    const long ch = g * cs + i / hw;
                    const double gh = gy[base + i] * (affine ? gamma_s[ch] : 1.0);
                    sum1 += gh;
                    sum2 += gh * xhat_s[base + i];
                }
                const double inv_m = 1.0 / static_cast<double>(m);
                for (long i = 0; i < m; ++i) {
                    const long ch = g * cs + i / hw;
                    const double gh = gy[base + i] * (affine ? gamma_s[ch] : 1.0);
                    gx[base + i] =
                        iv * (gh - inv_m * sum1 - xhat_s[base + i] * inv_m * sum2);
                }
            }
        }
        if (affine)
            return std::vector<Tensor>{std::move(gx), std::move(ggamma), std::move(gbeta)};
        return std::vector<Tensor>{std::move(gx)};
    };

    std::vector<Tensor> inputs = affine ? std::vector<Tensor>{x, gamma, beta}
                                        : std::vector<Tensor>{x};
    return ag::record("group_norm", std::move(y), std::move(inputs), std::move(vjp));
}

Tensor dynamic_conv(const Tensor& x, const Tensor& kernels, long k) {
    long n, c, h, w;
    const bool squeeze = as_batched(x, n, c, h, w, "dynamic_conv");
    if (k < 1 || k % 2 == 0) throw ConfigError("dynamic_conv: kernel size must be odd");
    long kn, kc, kh, kw;
    as_batched(kernels, kn, kc, kh, kw, "dynamic_conv kernels");
    if (kn != n || kh != h || kw != w || kc != c * k * k)
        throw DimError("dynamic_conv: kernels " + kernels.shape_str() + " incompatible with " +
                       x.shape_str() + " at k=" + std::to_string(k));
    const long kk = k * k, r = k / 2, hw = h * w;

    Tensor y = squeeze ? Tensor({c, h, w}) : Tensor({n, c, h, w});
    for (long b = 0; b < n; ++b)
        for (long ch = 0; ch < c; ++ch) {
            const double* xc = x.data() + (b * c + ch) * hw;
            double* dst = y.data() + (b * c + ch) * hw;
            for (long oy = 0; oy < h; ++oy)
                for (long ox = 0; ox < w; ++ox) {
                    double acc = 0.0;
                    for (long ky = 0; ky < k; ++ky) {
                        const long iy = oy + ky - r;
                        if (iy < 0 || iy >= h) continue;
                        for (long kx = 0; kx < k; ++kx) {
                            const long ix = ox + kx - r;
                            if (ix < 0 || ix >= w) continue;
                            acc += kernels.data()[((b * c * kk + ch * kk + ky * k + kx) * h + oy) *
                                                      w +
                                                  ox] *
                                   xc[iy * w + ix];
                        }
                    }
                    dst[oy * w + ox] = acc;
                }
        }

    Tensor xs = x.detach(), ks = kernels.detach();
    std::vector<long> xshape = x.shape(), kshape = kernels.shape();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx(xshape), gk(kshape);
        for (long b = 0; b < n; ++b)
            for (long ch = 0; ch < c; ++ch) {
                const double* xc = xs.data() + (b * c + ch) * hw;
                double* gxc = gx.data() + (b * c + ch) * hw;
                const double* g = gy.data() + (b * c + ch) * hw;
                for (long oy = 0; oy < h; ++oy)
                    for (long ox = 0; ox < w; ++ox) {
                        const double gv = g[oy * w + ox];
                        for (long ky = 0; ky < k; ++ky) {
                            const long iy = oy + ky - r;
                            if (iy < 0 || iy >= h) continue;
                            for (long kx = 0; kx < k; ++kx) {
                                const long ix = ox + kx - r;
                                if (ix < 0 || ix >= w) continue;
                                const long kidx =
                                    ((b * c * kk + ch * kk + ky * k + kx) * h + oy) * w + ox;
                                gxc[iy * w + ix] += gv * ks.data()[kidx];
                                gk.data()[kidx] = gv * xc[iy * w + ix];
                            }
                        }
                    }
            }
        return std::vector<Tensor>{std::move(gx), std::move(gk)};
    };
    return ag::record("dynamic_conv", std::move(y), {x, kernels}, std::move(vjp));
}

Tensor upsample2x(const Tensor& x) {
    require_rank(x, 4, "upsample2x");
    const long n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const long ho = 2 * h, wo = 2 * w;
    Tensor y({n, c, ho, wo});
    // align_corners=false: src = (dst + 0.5)/2 - 0.5
    std::vector<long> i0(static_cast<size_t>(ho + wo)), i1(static_cast<size_t>(ho + wo));
    std::vector<double> f(static_cast<size_t>(ho + wo));
    for (long o = 0; o < ho; ++o) {
        const double s = 0.5 * static_cast<double>(o) - 0.25;
        const double fl = std::floor(s);
        i0[o] = std::clamp(static_cast<long>(fl), 0L, h - 1);
        i1[o] = std::clamp(static_cast<long>(fl) + 1, 0L, h - 1);
        f[o] = s - fl;
    }
    for (long o = 0; o < wo; ++o) {
        const double s = 0.5 * static_cast<double>(o) - 0.25;
        const double fl = std::floor(s);
        i0[ho + o] = std::clamp(static_cast<long>(fl), 0L, w - 1);
        i1[ho + o] = std::clamp(static_cast<long>(fl) + 1, 0L, w - 1);
        f[ho + o] = s - fl;
    }
    for (long bc = 0; bc < n * c; ++bc) {
        const double* src = x.data() + bc * h * w;
        double* dst = y.data() + bc * ho * wo;
        for (long oy = 0; oy < ho; ++oy) {
            const double wy = f[oy];
            const double* r0 = src + i0[oy] * w;
            const double* r1 = src + i1[oy] * w;
            for (long ox = 0; ox < wo; ++ox) {
                const double wx = f[ho + ox];
                const double top = r0[i0[ho + ox]] * (1.0 - wx) + r0[i1[ho + ox]] * wx;
                const double bot = r1[i0[ho + ox]] * (1.0 - wx) + r1[i1[ho + ox]] * wx;
                dst[oy * wo + ox] = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    std::vector<long> xshape = x.shape();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx(xshape);
        for (long bc = 0; bc < n * c; ++bc) {
            double* gsrc = gx.data() + bc * h * w;
            const double* g = gy.data() + bc * ho * wo;
            for (long oy = 0; oy < ho; ++oy) {
                const double wy = f[oy];
                for (long ox = 0; ox < wo; ++ox) {
                    const double wx = f[ho + ox];
                    const double gv = g[oy * wo + ox];
                    gsrc[i0[oy] * w + i0[ho + ox]] += gv * (1.0 - wy) * (1.0 - wx);
                    gsrc[i0[oy] * w + i1[ho + ox]] += gv * (1.0 - wy) * wx;
                    gsrc[i1[oy] * w + i0[ho + ox]] += gv * wy * (1.0 - wx);
                    gsrc[i1[oy] * w + i1[ho + ox]] += gv * wy * wx;
                }
            }
        }
        return std::vector<Tensor>{std::move(gx)};
    };
    return ag::record("upsample2x", std::move(y), {x}, std::move(vjp));
}

Tensor avg_pool2x(const Tensor& x) {
    require_rank(x, 4, "avg_pool2x");
    const long n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0) throw DimError("avg_pool2x: H and W must be even");
    const long ho = h / 2, wo = w / 2;
    Tensor y({n, c, ho, wo});
    for (long bc = 0; bc < n * c; ++bc) {
        const double* src = x.data() + bc * h * w;
        double* dst = y.data() + bc * ho * wo;
        for (long oy = 0; oy < ho; ++oy)
            for (long ox = 0; ox < wo; ++ox)
                dst[oy * wo + ox] = 0.25 * (src[(2 * oy) * w + 2 * ox] +
                                            src[(2 * oy) * w + 2 * ox + 1] +
                                            src[(2 * oy + 1) * w + 2 * ox] +
                                            src[(2 * oy + 1) * w + 2 * ox + 1]);
    }
    std::vector<long> xshape = x.shape();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx(xshape);
        for (long bc = 0; bc < n * c; ++bc) {
            double* gsrc = gx.data() + bc * h * w;
            const double* g = gy.data() + bc * ho * wo;
            for (long oy = 0; oy < ho; ++oy)
                for (long ox = 0; ox < wo; ++ox) {
                    const double gv = 0.25 * g[oy * wo + ox];
                    gsrc[(2 * oy) * w + 2 * ox] += gv;
                    gsrc[(2 * oy) * w + 2 * ox + 1] += gv;
                    gsrc[(2 * oy + 1) * w + 2 * ox] += gv;
                    gsrc[(2 * oy + 1) * w + 2 * ox + 1] += gv;
                }
        }
        return std::vector<Tensor>{std::move(gx)};
    };
    return ag::record("avg_pool2x", std::move(y), {x}, std::move(vjp));
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    require_rank(x, 2, "linear");
    require_rank(w, 2, "linear weights");
    const long n = x.dim(0), f = x.dim(1), o = w.dim(0);
    if (w.dim(1) != f) throw DimError("linear: features " + x.shape_str() + " vs " + w.shape_str());
    if (b.defined() && (b.rank() != 1 || b.dim(0) != o)) throw DimError("linear: bias must be [O]");
    Tensor y({n, o});
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < o; ++j) {
            double acc = b.defined() ? b[j] : 0.0;
            const double* xr = x.data() + i * f;
            const double* wr = w.data() + j * f;
            for (long t = 0; t < f; ++t) acc += xr[t] * wr[t];
            y[i * o + j] = acc;
        }
    Tensor xs = x.detach(), ws = w.detach();
    const bool has_bias = b.defined();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx({n, f}), gw({o, f});
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < o; ++j) {
                const double g = gy[i * o + j];
                const double* wr = ws.data() + j * f;
                const double* xr = xs.data() + i * f;
                double* gxr = gx.data() + i * f;
                double* gwr = gw.data() + j * f;
                for (long t = 0; t < f; ++t) {
                    gxr[t] += g * wr[t];
                    gwr[t] += g * xr[t];
                }
            }
        if (!has_bias) return std::vector<Tensor>{std::move(gx), std::move(gw)};
        Tensor gb({o});
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < o; ++j) gb[j] += gy[i * o + j];
        return std::vector<Tensor>{std::move(gx), std::move(gw), std::move(gb)};
    };
    std::vector<Tensor> inputs = has_bias ? std::vector<Tensor>{x, w, b} : std::vector<Tensor>{x, w};
    return ag::record("linear", std::move(y), std::move(inputs), std::move(vjp));
}

Tensor channel_mean_max(const Tensor& x) {
    require_rank(x, 4, "channel_mean_max");
    const long n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor y({n, 2, x.dim(2), x.dim(3)});
    auto argmax = std::make_shared<std::vector<long>>(static_cast<size_t>(n * hw));
    for (long b = 0; b < n; ++b) {
        double* mean_dst = y.data() + (b * 2) * hw;
        double* max_dst = y.data() + (b * 2 + 1) * hw;
        for (long i = 0; i < hw; ++i) {
            double s = 0.0, mx = x.data()[(b * c) * hw + i];
            long arg = 0;
            for (long ch = 0; ch < c; ++ch) {
                const double v = x.data()[(b * c + ch) * hw + i];
                s += v;
                if (v > mx) {
                    mx = v;
                    arg = ch;
                }
            }
            mean_dst[i] = s / static_cast<double>(c);
            max_dst[i] = mx;
            (*argmax)[b * hw + i] = arg;
        }
    }
    std::vector<long> xshape = x.shape();
    auto vjp = [=](const Tensor& gy) {
        Tensor gx(xshape);
        for (long b = 0; b < n; ++b) {
            const double* gmean = gy.data() + (b * 2) * hw;
            const double* gmax = gy.data() + (b * 2 + 1) * hw;
            for (long i = 0; i < hw; ++i) {
                const double gm = gmean[i] / static_cast<double>(c);
                for (long ch = 0; ch < c; ++ch) gx.data()[(b * c + ch) * hw + i] += gm;
                gx.data()[(b * c + (*argmax)[b * hw + i]) * hw + i] += gmax[i];
            }
        }
        return std::vector<Tensor>{std::move(gx)};
    };
    return ag::record("channel_mean_max", std::move(y), {x}, std::move(vjp));
}

Tensor charbonnier(const Tensor& a, const Tensor& b, double eps) {
    require_same_shape(a, b, "charbonnier");
    const long n = a.size();
    const double e2 = eps * eps;
    double s = 0.0;
    Tensor d(a.shape());
    for (long i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        s += std::sqrt(d[i] * d[i] + e2);
    }
    Tensor y = Tensor::scalar(s / static_cast<double>(n));
    Tensor ds = d.detach();
    auto vjp = [=](const Tensor& gy) {
        const double g = gy[0] / static_cast<double>(n);
        Tensor ga(ds.shape()), gb(ds.shape());
        for (long i = 0; i < n; ++i) {
            const double dv = ds[i];
            const double gr = g * dv / std::sqrt(dv * dv + e2);
            ga[i] = gr;
            gb[i] = -gr;
        }
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    };
    return ag::record("charbonnier", std::move(y), {a, b}, std::move(vjp));
}

} // namespace evdb::ops
