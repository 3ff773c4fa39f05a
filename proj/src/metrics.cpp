#include "evdb/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "evdb/errors.hpp"

namespace evdb {

namespace {

constexpr long kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

double psnr_plane(const double* a, const double* b, long n) {
    double mse = 0.0;
    for (long i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

std::vector<double> gaussian_window() {
    std::vector<double> w(kWin);
    double sum = 0.0;
    for (long i = 0; i < kWin; ++i) {
        const double d = static_cast<double>(i - kWin / 2);
        w[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += w[static_cast<size_t>(i)];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable valid-mode filtering with the normalized Gaussian window.
std::vector<double> filter_valid(const std::vector<double>& img, long h, long w,
                                 const std::vector<double>& win) {
    const long ho = h - kWin + 1, wo = w - kWin + 1;
    std::vector<double> rows(static_cast<size_t>(h * wo));
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (long k = 0; k < kWin; ++k) acc += win[static_cast<size_t>(k)] * img[static_cast<size_t>(y * w + x + k)];
            rows[static_cast<size_t>(y * wo + x)] = acc;
        }
    std::vector<double> out(static_cast<size_t>(ho * wo));
    for (long y = 0; y < ho; ++y)
        for (long x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (long k = 0; k < kWin; ++k) acc += win[static_cast<size_t>(k)] * rows[static_cast<size_t>((y + k) * wo + x)];
            out[static_cast<size_t>(y * wo + x)] = acc;
        }
    return out;
}

double ssim_plane(const double* a, const double* b, long h, long w) {
    if (h < kWin || w < kWin)
        throw InputError("ssim: image smaller than the 11x11 window");
    const std::vector<double> win = gaussian_window();
    const long n = h * w;
    std::vector<double> pa(a, a + n), pb(b, b + n), paa(static_cast<size_t>(n)),
        pbb(static_cast<size_t>(n)), pab(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
        paa[static_cast<size_t>(i)] = a[i] * a[i];
        pbb[static_cast<size_t>(i)] = b[i] * b[i];
        pab[static_cast<size_t>(i)] = a[i] * b[i];
    }
    const std::vector<double> mu_a = filter_valid(pa, h, w, win);
    const std::vector<double> mu_b = filter_valid(pb, h, w, win);
    const std::vector<double> m_aa = filter_valid(paa, h, w, win);
    const std::vector<double> m_bb = filter_valid(pbb, h, w, win);
    const std::vector<double> m_ab = filter_valid(pab, h, w, win);

    const double c1 = kK1 * kK1; // dynamic range 1.0
    const double c2 = kK2 * kK2;
    double total = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        total += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

void require_pair(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw DimError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                       b.shape_str());
    if (a.rank() != 2 && !(a.rank() == 3 && a.dim(0) == 3))
        throw DimError(std::string(op) + ": expected [H,W] or [3,H,W]");
}

} // namespace

double psnr(const Tensor& a, const Tensor& b) {
    require_pair(a, b, "psnr");
    if (a.rank() == 2) return psnr_plane(a.data(), b.data(), a.size());
    const long hw = a.dim(1) * a.dim(2);
    double acc = 0.0;
    for (long c = 0; c < 3; ++c) acc += psnr_plane(a.data() + c * hw, b.data() + c * hw, hw);
    return acc / 3.0;
}

double ssim(const Tensor& a, const Tensor& b) {
    require_pair(a, b, "ssim");
    if (a.rank() == 2) return ssim_plane(a.data(), b.data(), a.dim(0), a.dim(1));
    const long h = a.dim(1), w = a.dim(2), hw = h * w;
    double acc = 0.0;
    for (long c = 0; c < 3; ++c) acc += ssim_plane(a.data() + c * hw, b.data() + c * hw, h, w);
    return acc / 3.0;
}

MetricReport evaluate_pairs(const std::vector<Tensor>& predictions,
                            const std::vector<Tensor>& references) {
    if (predictions.size() != references.size())
        throw InputError("evaluate_pairs: prediction/reference count mismatch");
    if (predictions.empty()) throw InputError("evaluate_pairs: nothing to evaluate");
    MetricReport report;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double p = psnr(predictions[i], references[i]);
        const double s = ssim(predictions[i], references[i]);
        report.per_image.emplace_back(p, s);
        report.psnr_db += p;
        report.ssim_val += s;
    }
    report.psnr_db /= static_cast<double>(predictions.size());
    report.ssim_val /= static_cast<double>(predictions.size());
    return report;
}

std::string metric_report_json(const MetricReport& report) {
    nlohmann::json j;
    j["psnr_db"] = report.psnr_db;
    j["ssim"] = report.ssim_val;
    nlohmann::json images = nlohmann::json::array();
    for (const auto& [p, s] : report.per_image) images.push_back({{"psnr_db", p}, {"ssim", s}});
    j["images"] = images;
    return j.dump(2) + "\n";
}

std::string metric_report_csv(const MetricReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "index,psnr_db,ssim\n";
    for (size_t i = 0; i < report.per_image.size(); ++i)
        os << i << ',' << report.per_image[i].first << ',' << report.per_image[i].second << '\n';
    os << "mean," << report.psnr_db << ',' << report.ssim_val << '\n';
    return os.str();
}

} // namespace evdb
