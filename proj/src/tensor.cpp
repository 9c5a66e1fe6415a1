#include "dfka/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace dfka {

namespace {
std::atomic<std::uint64_t> g_seq{1};
thread_local bool g_grad_enabled = true;
}  // namespace

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

void Node::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
}

Tensor::Tensor(Shape shape, bool requires_grad) {
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dimension in " + shape_str(shape));
    }
    node_ = std::make_shared<Node>();
    node_->shape = std::move(shape);
    node_->data.assign(static_cast<size_t>(shape_numel(node_->shape)), 0.0f);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::from(Shape shape, std::vector<float> values, bool requires_grad) {
    Tensor t(shape, requires_grad);
    if (static_cast<std::int64_t>(values.size()) != t.numel()) {
        throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                    " values for shape " + shape_str(shape));
    }
    t.node_->data.assign(values.begin(), values.end());
    return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return Tensor(std::move(shape), requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
    Tensor t(std::move(shape), requires_grad);
    std::fill(t.node_->data.begin(), t.node_->data.end(), value);
    return t;
}

Tensor Tensor::scalar(float value) { return full({1}, value); }

const Shape& Tensor::shape() const { return node_->shape; }
std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(node_->data.size()); }
int Tensor::dim(int i) const { return node_->shape.at(static_cast<size_t>(i)); }
int Tensor::ndim() const { return static_cast<int>(node_->shape.size()); }

std::span<float> Tensor::data() { return node_->data; }
std::span<const float> Tensor::data() const { return node_->data; }

float Tensor::value() const {
    if (numel() != 1) throw std::invalid_argument("Tensor::value: not a scalar, shape " + shape_str(shape()));
    return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
void Tensor::set_requires_grad(bool rg) { node_->requires_grad = rg; }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const float> Tensor::grad() const {
    if (!has_grad()) throw std::runtime_error("Tensor::grad: no gradient present");
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_) node_->grad.clear();
}

Tensor Tensor::detach() const {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = node_->shape;
    t.node_->data = node_->data;
    return t;
}

Tensor Tensor::clone() const {
    Tensor t = detach();
    t.node_->requires_grad = node_->requires_grad;
    return t;
}

bool Tensor::all_finite() const {
    for (float v : node_->data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::wrap(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor record_op(Shape shape, FloatBuf data,
                 std::vector<std::shared_ptr<Node>> parents,
                 std::function<void(Node&)> backprop) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    if (grad_enabled()) {
        bool any = false;
        for (const auto& p : parents) any = any || (p && p->requires_grad);
        if (any) {
            node->requires_grad = true;
            node->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
            node->parents = std::move(parents);
            node->backprop = std::move(backprop);
        }
    }
    return Tensor::wrap(std::move(node));
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw std::invalid_argument("backward: loss must be a defined scalar");
    }
    const auto& root = loss.node();
    if (!root->requires_grad) {
        throw std::invalid_argument("backward: loss is not connected to any differentiable input");
    }

    // Collect the reachable subgraph.
    std::vector<Node*> nodes;
    std::unordered_set<Node*> seen;
    std::vector<Node*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        nodes.push_back(n);
        for (const auto& p : n->parents) {
            if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }

    // Intermediate grads are per-call scratch; leaf grads accumulate.
    for (Node* n : nodes) {
        if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0f);
        else n->ensure_grad();
    }
    root->ensure_grad();
    root->grad[0] += 1.0f;

    std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->seq > b->seq; });
    for (Node* n : nodes) {
        if (n->backprop) n->backprop(*n);
    }
}

}  // namespace dfka
