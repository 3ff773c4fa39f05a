#include "evdb/autograd.hpp"

#include <algorithm>
#include <unordered_set>

#include "evdb/errors.hpp"

namespace evdb::ag {

void GradTable::add(const NodePtr& node, const Tensor& g) {
    auto it = grads_.find(node.get());
    if (it == grads_.end()) {
        grads_.emplace(node.get(), Entry{g, false});
        return;
    }
    Entry& e = it->second;
    if (!e.g.same_shape(g))
        throw DimError("gradient shape mismatch for node '" + node->name + "'");
    if (!e.owned) {          // first entry may alias a vjp output; copy before
        e.g = e.g.clone();   // mutating so aliased tensors stay intact
        e.owned = true;
    }
    double* a = e.g.data();
    const double* b = g.data();
    const long n = e.g.size();
    for (long i = 0; i < n; ++i) a[i] += b[i];
}

bool GradTable::contains(const Tensor& t) const {
    return t.node() && grads_.count(t.node().get()) > 0;
}

Tensor GradTable::get(const Tensor& t) const {
    if (!t.node()) return Tensor();
    auto it = grads_.find(t.node().get());
    return it == grads_.end() ? Tensor() : it->second.g;
}

const Tensor* GradTable::find(const Node* node) const {
    auto it = grads_.find(node);
    return it == grads_.end() ? nullptr : &it->second.g;
}

namespace {

// Iterative post-order DFS; returns nodes so that every node appears after
// all nodes that consume it (i.e. reverse of the order we traverse grads).
std::vector<Node*> topo_order(const NodePtr& root) {
    std::vector<Node*> order;
    std::unordered_set<const Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order; // children precede parents' ancestors; reverse before use
}

} // namespace

GradTable backward(const Tensor& loss, bool store_on_leaves) {
    if (!loss.node()) throw StateError("backward: tensor has no recorded graph");
    if (loss.size() != 1) throw DimError("backward: loss must be scalar, got " + loss.shape_str());

    GradTable table;
    table.add(loss.node(), Tensor::full(loss.shape(), 1.0));

    std::vector<Node*> order = topo_order(loss.node());
    // order is post-order: parents (inputs) appear before consumers. Walk it
    // backwards so each node's full upstream gradient is ready when visited.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        const Tensor* upstream = table.find(node);
        if (upstream == nullptr) continue; // no differentiable path from loss
        if (node->is_leaf || !node->vjp) continue;
        std::vector<Tensor> parent_grads = node->vjp(*upstream);
        if (parent_grads.size() != node->parents.size())
            throw StateError("vjp of '" + node->name + "' returned wrong arity");
        for (size_t p = 0; p < node->parents.size(); ++p) {
            if (!parent_grads[p].defined()) continue; // input not differentiated
            check_finite(parent_grads[p], node->name.c_str());
            table.add(node->parents[p], parent_grads[p]);
        }
    }

    if (store_on_leaves) {
        for (Node* node : order) {
            if (!node->is_leaf) continue;
            const Tensor* g = table.find(node);
            if (g == nullptr) continue;
            if (node->grad.defined()) {
                double* a = node->grad.data();
                const double* b = g->data();
                for (long i = 0; i < node->grad.size(); ++i) a[i] += b[i];
            } else {
                node->grad = g->clone();
            }
        }
    }
    return table;
}

Tensor record(const char* op, Tensor output, std::vector<Tensor> inputs,
              std::function<std::vector<Tensor>(const Tensor&)> vjp) {
    check_finite(output, op);
    bool any_grad = false;
    for (const Tensor& t : inputs)
        if (t.requires_grad()) any_grad = true;
    if (!any_grad) return output;

    auto node = std::make_shared<Node>();
    node->name = op;
    node->vjp = std::move(vjp);
    node->value = output;
    for (const Tensor& t : inputs) {
        NodePtr p = t.node();
        if (!p) {
            // constant input: give it an anonymous leaf so vjp arity is stable
            p = std::make_shared<Node>();
            p->is_leaf = true;
            p->name = "";
            p->value = t;
        }
        node->parents.push_back(std::move(p));
    }
    output.set_node(std::move(node));
    return output;
}

std::vector<std::string> leaf_dependencies(const Tensor& t) {
    std::vector<std::string> names;
    if (!t.node()) return names;
    for (Node* node : topo_order(t.node()))
        if (node->is_leaf && !node->name.empty()) names.push_back(node->name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

size_t graph_size(const Tensor& t) {
    if (!t.node()) return 0;
    return topo_order(t.node()).size();
}

} // namespace evdb::ag
