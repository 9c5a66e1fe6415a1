#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dfka {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

/// Allocator pinning every buffer to one cache-line alignment. Vectorized
/// matrix kernels peel loop heads based on the runtime address; a fixed
/// alignment keeps the summation order identical across runs, which the
/// bit-exact reproducibility guarantee depends on.
template <typename T, std::size_t Align = 64>
struct AlignedAllocator {
    using value_type = T;
    template <typename U>
    struct rebind {
        using other = AlignedAllocator<U, Align>;
    };
    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U, Align>&) {}
    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
    }
    void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t{Align}); }
    template <typename U>
    bool operator==(const AlignedAllocator<U, Align>&) const { return true; }
};

using FloatBuf = std::vector<float, AlignedAllocator<float>>;

/// One recorded node of the computation graph. Nodes form the tape:
/// `seq` is the global recording order, and backward replays strictly
/// in decreasing `seq`.
struct Node {
    Shape shape;
    FloatBuf data;
    FloatBuf grad;  // sized lazily, same length as data
    bool requires_grad = false;
    std::uint64_t seq = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // accumulates into parents' grad

    bool is_leaf() const { return parents.empty(); }
    void ensure_grad();
};

/// Dense float32 tensor with value semantics on the handle and shared
/// storage underneath. Copying a Tensor aliases the same node; clone()
/// makes an independent leaf copy.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);

    static Tensor from(Shape shape, std::vector<float> values, bool requires_grad = false);
    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, float value, bool requires_grad = false);
    static Tensor scalar(float value);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::int64_t numel() const;
    int dim(int i) const;
    int ndim() const;

    std::span<float> data();
    std::span<const float> data() const;
    float value() const;  // scalar tensors only

    bool requires_grad() const;
    void set_requires_grad(bool rg);
    bool has_grad() const;
    std::span<const float> grad() const;  // throws when no grad present
    void zero_grad();

    /// Value copy with no graph history and no grad.
    Tensor detach() const;
    /// Independent leaf with copied values, keeping requires_grad.
    Tensor clone() const;

    bool all_finite() const;

    const std::shared_ptr<Node>& node() const { return node_; }
    static Tensor wrap(std::shared_ptr<Node> node);

private:
    std::shared_ptr<Node> node_;
};

/// Thread-local gradient-recording switch.
bool grad_enabled();
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Record an op result on the tape. Returns a plain constant tensor when
/// grad recording is off or no parent requires grad.
Tensor record_op(Shape shape, FloatBuf data,
                 std::vector<std::shared_ptr<Node>> parents,
                 std::function<void(Node&)> backprop);

/// Reverse pass from a scalar loss. Gradients of leaf tensors accumulate
/// across calls; intermediate gradients are reset per call.
void backward(const Tensor& loss);

}  // namespace dfka
