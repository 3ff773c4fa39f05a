#include "evdb/tensor.hpp"

#include <cmath>
#include <sstream>

#include "evdb/autograd.hpp"
#include "evdb/errors.hpp"

namespace evdb {

long shape_product(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) n *= d;
    return n;
}

Tensor::Tensor() = default;
Tensor::~Tensor() = default;
Tensor::Tensor(const Tensor&) = default;
Tensor::Tensor(Tensor&&) noexcept = default;
Tensor& Tensor::operator=(const Tensor&) = default;
Tensor& Tensor::operator=(Tensor&&) noexcept = default;

Tensor::Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
    for (long d : shape_)
        if (d <= 0) throw DimError("Tensor: non-positive dimension in shape " + shape_str());
    if (shape_.size() > 4) throw DimError("Tensor: rank > 4 unsupported");
    data_ = std::make_shared<std::vector<double>>(static_cast<size_t>(shape_product(shape_)), 0.0);
}

Tensor Tensor::zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<long> shape, double value) {
    Tensor t(std::move(shape));
    t.fill_(value);
    return t;
}

Tensor Tensor::from(std::vector<long> shape, std::vector<double> values) {
    Tensor t(std::move(shape));
    if (static_cast<long>(values.size()) != t.size())
        throw DimError("Tensor::from: data length does not match shape " + t.shape_str());
    *t.data_ = std::move(values);
    return t;
}

Tensor Tensor::scalar(double value) {
    Tensor t(std::vector<long>{1});
    (*t.data_)[0] = value;
    return t;
}

Tensor Tensor::leaf(std::string name, std::vector<long> shape) {
    return leaf_from(std::move(name), Tensor(std::move(shape)));
}

Tensor Tensor::leaf_from(std::string name, const Tensor& value) {
    Tensor t = value.detach();
    auto node = std::make_shared<ag::Node>();
    node->name = std::move(name);
    node->is_leaf = true;
    node->value = t;
    t.set_node(std::move(node));
    return t;
}

long Tensor::dim(int i) const {
    if (i < 0 || i >= rank()) throw DimError("Tensor::dim: axis out of range");
    return shape_[static_cast<size_t>(i)];
}

long Tensor::size() const { return data_ ? static_cast<long>(data_->size()) : 0; }

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << "]";
    return os.str();
}

double* Tensor::data() { return data_->data(); }
const double* Tensor::data() const { return data_->data(); }
double& Tensor::operator[](long i) { return (*data_)[static_cast<size_t>(i)]; }
double Tensor::operator[](long i) const { return (*data_)[static_cast<size_t>(i)]; }

double& Tensor::at(long c, long h, long w) {
    return (*data_)[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
}
double Tensor::at(long c, long h, long w) const {
    return (*data_)[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
}
double& Tensor::at(long n, long c, long h, long w) {
    return (*data_)[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}
double Tensor::at(long n, long c, long h, long w) const {
    return (*data_)[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

Tensor Tensor::clone() const {
    Tensor t;
    t.shape_ = shape_;
    if (data_) t.data_ = std::make_shared<std::vector<double>>(*data_);
    return t;
}

Tensor Tensor::detach() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
}

Tensor Tensor::reshaped_view(std::vector<long> shape) const {
    if (shape_product(shape) != size())
        throw DimError("reshaped_view: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
}

void Tensor::fill_(double value) {
    for (double& v : *data_) v = value;
}

double Tensor::item() const {
    if (size() != 1) throw DimError("Tensor::item: size != 1, shape " + shape_str());
    return (*data_)[0];
}

double Tensor::sum() const {
    double s = 0.0;
    for (double v : *data_) s += v;
    return s;
}

double Tensor::min() const {
    double m = (*data_)[0];
    for (double v : *data_) m = std::min(m, v);
    return m;
}

double Tensor::max() const {
    double m = (*data_)[0];
    for (double v : *data_) m = std::max(m, v);
    return m;
}

bool Tensor::all_finite() const {
    for (double v : *data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::grad() const {
    if (!node_) return Tensor();
    return node_->grad;
}

void check_finite(const Tensor& t, const char* where) {
    if (!t.all_finite())
        throw NumericError(std::string("non-finite value produced by ") + where);
}

} // namespace evdb
