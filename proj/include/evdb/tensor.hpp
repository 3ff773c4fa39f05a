#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace evdb {

namespace ag {
struct Node;
using NodePtr = std::shared_ptr<Node>;
} // namespace ag

// Dense row-major tensor of doubles, rank 0..4. Copies are shallow (shared
// storage); use clone() for a deep copy. A tensor optionally carries an
// autograd node so that primitives applied to it are recorded.
class Tensor {
public:
    Tensor();
    explicit Tensor(std::vector<long> shape); // zero-filled
    ~Tensor();
    Tensor(const Tensor&);
    Tensor(Tensor&&) noexcept;
    Tensor& operator=(const Tensor&);
    Tensor& operator=(Tensor&&) noexcept;

    static Tensor zeros(std::vector<long> shape);
    static Tensor full(std::vector<long> shape, double value);
    static Tensor from(std::vector<long> shape, std::vector<double> values);
    static Tensor scalar(double value);

    // Leaf with an autograd node; gradients accumulate on it during backward.
    static Tensor leaf(std::string name, std::vector<long> shape);
    static Tensor leaf_from(std::string name, const Tensor& value);

    bool defined() const { return data_ != nullptr; }
    const std::vector<long>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    long dim(int i) const;
    long size() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_str() const;

    double* data();
    const double* data() const;
    double& operator[](long i);
    double operator[](long i) const;

    // 3-D / 4-D element access for readable test and reference code.
    double& at(long c, long h, long w);
    double at(long c, long h, long w) const;
    double& at(long n, long c, long h, long w);
    double at(long n, long c, long h, long w) const;

    Tensor clone() const;       // deep copy, drops the autograd node
    Tensor detach() const;      // shared data, drops the autograd node
    Tensor reshaped_view(std::vector<long> shape) const; // shared data, no node

    void fill_(double value);
    double item() const;        // requires size() == 1
    double sum() const;
    double min() const;
    double max() const;
    bool all_finite() const;

    bool requires_grad() const { return node_ != nullptr; }
    const ag::NodePtr& node() const { return node_; }
    void set_node(ag::NodePtr node) { node_ = std::move(node); }

    // Gradient accumulated on this tensor's leaf node by the last backward()
    // that was asked to retain leaf gradients. Undefined tensor if none.
    Tensor grad() const;

private:
    std::vector<long> shape_;
    std::shared_ptr<std::vector<double>> data_;
    ag::NodePtr node_;
};

// Throws NumericError when t contains a NaN or Inf; `where` names the
// primitive for the diagnostic.
void check_finite(const Tensor& t, const char* where);

long shape_product(const std::vector<long>& shape);

} // namespace evdb
