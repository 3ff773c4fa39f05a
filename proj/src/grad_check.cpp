#include "evdb/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "evdb/autograd.hpp"
#include "evdb/errors.hpp"
#include "evdb/rng.hpp"

namespace evdb {

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> points,
                           double h, double tol, long max_coords, uint64_t seed) {
    GradCheckReport report;
    for (const Tensor& p : points) {
        if (!p.requires_grad()) {
            report.failure = "grad_check: point tensor is not a leaf";
            return report;
        }
        if (!p.all_finite()) {
            report.failure = "grad_check: non-finite starting point";
            return report;
        }
    }

    std::vector<Tensor> analytic;
    try {
        Tensor loss = f();
        if (loss.size() != 1) {
            report.failure = "grad_check: f must be scalar-valued";
            return report;
        }
        ag::GradTable table = ag::backward(loss, /*store_on_leaves=*/false);
        for (const Tensor& p : points) {
            Tensor g = table.get(p);
            analytic.push_back(g.defined() ? g : Tensor::zeros(p.shape()));
        }
    } catch (const NumericError& e) {
        report.failure = e.what();
        return report;
    }

    Rng rng(seed ^ 0x9d2c5680u);
    for (size_t pi = 0; pi < points.size(); ++pi) {
        Tensor& p = points[pi];
        const long n = p.size();
        std::vector<long> coords;
        if (max_coords > 0 && n > max_coords) {
            for (long i = 0; i < max_coords; ++i)
                coords.push_back(static_cast<long>(rng.uniform_index(static_cast<uint64_t>(n))));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        } else {
            coords.resize(static_cast<size_t>(n));
            for (long i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
        }
        for (long i : coords) {
            const double orig = p[i];
            double lp, lm;
            try {
                p[i] = orig + h;
                lp = f().item();
                p[i] = orig - h;
                lm = f().item();
            } catch (const NumericError& e) {
                p[i] = orig;
                report.failure = e.what();
                return report;
            }
            p[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = analytic[pi][i];
            const double rel = std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1.0);
            ++report.checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                const ag::NodePtr& node = p.node();
                report.worst = (node && !node->name.empty() ? node->name : "point") + "[" +
                               std::to_string(i) + "]";
            }
        }
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

GradCheckReport grad_check(const std::function<Tensor()>& f, const Tensor& point, double h,
                           double tol) {
    return grad_check(f, std::vector<Tensor>{point}, h, tol);
}

} // namespace evdb
