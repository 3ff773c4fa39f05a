#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evdb/tensor.hpp"

namespace evdb {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::string worst;       // tensor/coordinate of the worst error
    long checked = 0;        // number of coordinates compared
    std::string failure;     // non-empty when evaluation raised (with location)
};

// Compares the recorded-graph gradient of the scalar f() against central
// finite differences, perturbing the given leaf tensors in place. f must be
// re-evaluable (pure in everything but the leaves). max_coords > 0 samples
// that many coordinates per tensor (deterministic in `seed`); 0 checks all.
// Relative error per coordinate: |fd - analytic| / max(|fd| + |analytic|, 1).
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> points,
                           double h, double tol, long max_coords = 0, uint64_t seed = 0);

GradCheckReport grad_check(const std::function<Tensor()>& f, const Tensor& point, double h,
                           double tol);

} // namespace evdb
