#pragma once

#include <string>
#include <vector>

#include "evdb/tensor.hpp"

namespace evdb {

// PSNR in dB over planes in [0,1]; identical images report the 99 dB cap.
// Color inputs ([3,H,W]) are averaged over channels via a joint MSE.
double psnr(const Tensor& a, const Tensor& b);

// Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, dynamic range 1.0, mean over all valid window positions. Color
// inputs are scored per channel and averaged.
double ssim(const Tensor& a, const Tensor& b);

struct MetricReport {
    double psnr_db = 0.0;  // mean over images
    double ssim_val = 0.0; // mean over images
    std::vector<std::pair<double, double>> per_image; // (psnr, ssim)
};

MetricReport evaluate_pairs(const std::vector<Tensor>& predictions,
                            const std::vector<Tensor>& references);

std::string metric_report_json(const MetricReport& report);
std::string metric_report_csv(const MetricReport& report);

inline constexpr double kPsnrCap = 99.0;

} // namespace evdb
