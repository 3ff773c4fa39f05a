#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "evdb/tensor.hpp"

namespace evdb::ag {

// One recorded primitive application (or a leaf). The graph is a DAG of
// shared_ptr links from outputs to inputs; it lives as long as some output
// tensor references it, so each forward pass owns its own graph and
// concurrent recording over different samples needs no locking.
struct Node {
    std::string name;                       // leaf name or primitive name
    bool is_leaf = false;
    std::vector<NodePtr> parents;
    // vector-Jacobian product: upstream gradient -> gradient per parent.
    std::function<std::vector<Tensor>(const Tensor&)> vjp;
    Tensor value;                           // forward result (shared storage)
    Tensor grad;                            // set on leaves by backward()

    Node() = default;
};

// Gradients keyed by node; lookups by tensor identity. Entries become owned
// copies only once a second contribution arrives, so single-consumer nodes
// (the common case) never pay for a clone.
class GradTable {
public:
    void add(const NodePtr& node, const Tensor& g);
    bool contains(const Tensor& t) const;
    // Gradient of `t`'s node; undefined Tensor when t has no node or did not
    // participate in the backward pass.
    Tensor get(const Tensor& t) const;
    const Tensor* find(const Node* node) const;

private:
    struct Entry {
        Tensor g;
        bool owned = false;
    };
    std::unordered_map<const Node*, Entry> grads_;
};

// Reverse-mode sweep from a scalar `loss`. Visits every reachable node
// exactly once in reverse topological order and accumulates contributions
// into the table. When `store_on_leaves` is set, each leaf node's `grad`
// member is also assigned (convenient for single-threaded use; parallel
// batch evaluation must keep it off and combine tables instead).
GradTable backward(const Tensor& loss, bool store_on_leaves = true);

// Record a primitive application. Checks the output for NaN/Inf, attaches a
// node when any input is recorded, and returns the output tensor.
Tensor record(const char* op, Tensor output, std::vector<Tensor> inputs,
              std::function<std::vector<Tensor>(const Tensor&)> vjp);

// Names of all leaves reachable from `t`'s graph, sorted. This is the
// dependency set of a loss: the complete list of inputs and parameters the
// value could have been influenced by.
std::vector<std::string> leaf_dependencies(const Tensor& t);

// Number of distinct nodes reachable from `t` (diagnostics / tests).
size_t graph_size(const Tensor& t);

} // namespace evdb::ag
