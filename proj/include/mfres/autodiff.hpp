#pragma once

#include "mfres/kernels.hpp"
#include "mfres/tensor.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace mfres {

// Reverse-mode node: value plus lazily allocated gradient slot.
struct Var {
    Tensor val;
    Tensor grad;
    bool requires_grad = false;

    explicit Var(Tensor v, bool req = false) : val(std::move(v)), requires_grad(req) {}
    void ensure_grad() {
        if (grad.shape == val.shape && grad.count() == val.count()) return;
        grad = Tensor(val.shape);
    }
    void zero_grad() {
        ensure_grad();
        grad.fill(0.0);
    }
};
using VarPtr = std::shared_ptr<Var>;

VarPtr make_var(Tensor value, bool requires_grad = false);

// Dynamic tape; backward() runs recorded closures in reverse order.
class Tape {
public:
    void push(std::function<void()> op) { ops_.push_back(std::move(op)); }
    void backward() {
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }
    void clear() { ops_.clear(); }
    std::size_t size() const { return ops_.size(); }

private:
    std::vector<std::function<void()>> ops_;
};

enum class RunMode { train, infer };

// graph ops; every input grad is accumulated (+=)
VarPtr conv3d(Tape& tape, const VarPtr& in, const VarPtr& kernel, const VarPtr& bias,
              Stride3 stride);
VarPtr deconv3d(Tape& tape, const VarPtr& in, const VarPtr& kernel, const VarPtr& bias,
                Stride3 stride);
VarPtr relu(Tape& tape, const VarPtr& in);
VarPtr sigmoid(Tape& tape, const VarPtr& in);
VarPtr tanh_op(Tape& tape, const VarPtr& in);
VarPtr add(Tape& tape, const VarPtr& a, const VarPtr& b);
VarPtr mul(Tape& tape, const VarPtr& a, const VarPtr& b);
VarPtr concat_channels(Tape& tape, const VarPtr& a, const VarPtr& b);
std::array<VarPtr, 4> split4_channels(Tape& tape, const VarPtr& in);
// Stack per-step tensors along the batch axis, time-major:
// out index = t * B + b.
VarPtr stack_steps(Tape& tape, const std::vector<VarPtr>& steps);
// Tile the batch axis `times` with the same time-major order.
VarPtr repeat_steps(Tape& tape, const VarPtr& in, int times);

// Batch norm with running statistics held by the caller.
struct BatchNormState {
    Tensor gamma, beta;          // trainable
    Tensor running_mean, running_var;
    double eps = 1e-5;
    double momentum = 0.9;
};
VarPtr batch_norm(Tape& tape, const VarPtr& in, const VarPtr& gamma, const VarPtr& beta,
                  BatchNormState& state, RunMode mode);

// Mean squared field mismatch plus lambda-weighted mean squared mismatch
// over well cells; means over every contributing element.
VarPtr well_weighted_mse(Tape& tape, const VarPtr& pred, const Tensor& target,
                         const std::vector<int>& well_cells, double lambda_w);

}  // namespace mfres
