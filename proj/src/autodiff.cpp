#include "mfres/autodiff.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mfres {

VarPtr make_var(Tensor value, bool requires_grad) {
    return std::make_shared<Var>(std::move(value), requires_grad);
}

namespace {

bool any_grad(const VarPtr& a) { return a->requires_grad; }

void mark_output(const VarPtr& out, std::initializer_list<VarPtr> inputs) {
    for (const auto& in : inputs) {
        if (in->requires_grad) {
            out->requires_grad = true;
            return;
        }
    }
}

}  // namespace

VarPtr conv3d(Tape& tape, const VarPtr& in, const VarPtr& kernel, const VarPtr& bias,
              Stride3 stride) {
    auto out = make_var(Tensor(conv3d_out_shape(in->val.shape, kernel->val.shape, stride)));
    kern::conv3d_fwd(in->val, kernel->val, bias->val, stride, out->val);
    mark_output(out, {in, kernel, bias});
    if (out->requires_grad) {
        out->zero_grad();
        tape.push([=]() {
            if (in->requires_grad) {
                in->ensure_grad();
                kern::conv3d_bwd_input(out->grad, kernel->val, stride, in->grad);
            }
            if (kernel->requires_grad) {
                kernel->ensure_grad();
                kern::conv3d_bwd_kernel(out->grad, in->val, stride, kernel->grad);
            }
            if (bias->requires_grad) {
                bias->ensure_grad();
                kern::conv3d_bwd_bias(out->grad, bias->grad);
            }
        });
    }
    return out;
}

VarPtr deconv3d(Tape& tape, const VarPtr& in, const VarPtr& kernel, const VarPtr& bias,
                Stride3 stride) {
    // transposed convolution: the exact adjoint of conv3d with this kernel
    const TensorShape out_shape = deconv3d_out_shape(in->val.shape, kernel->val.shape, stride);
    auto out = make_var(Tensor(out_shape));
    kern::conv3d_bwd_input(in->val, kernel->val, stride, out->val);
    // broadcast bias over channels
    {
        const int C = out_shape.c;
        if (bias->val.count() != C) throw std::invalid_argument("deconv3d: bias length mismatch");
        double* op = out->val.data();
        const double* bp = bias->val.data();
        const std::int64_t voxels = out->val.count() / C;
        for (std::int64_t v = 0; v < voxels; ++v)
            for (int c = 0; c < C; ++c) op[v * C + c] += bp[c];
    }
    mark_output(out, {in, kernel, bias});
    if (out->requires_grad) {
        out->zero_grad();
        tape.push([=]() {
            if (in->requires_grad) {
                in->ensure_grad();
                Tensor tmp(in->val.shape);
                Tensor zero_bias({1, 1, 1, 1, in->val.shape.c});
                kern::conv3d_fwd(out->grad, kernel->val, zero_bias, stride, tmp);
                for (std::int64_t i = 0; i < tmp.count(); ++i)
                    in->grad.v[static_cast<std::size_t>(i)] += tmp.v[static_cast<std::size_t>(i)];
            }
            if (kernel->requires_grad) {
                kernel->ensure_grad();
                kern::conv3d_bwd_kernel(in->val, out->grad, stride, kernel->grad);
            }
            if (bias->requires_grad) {
                bias->ensure_grad();
                kern::conv3d_bwd_bias(out->grad, bias->grad);
            }
        });
    }
    return out;
}

namespace {

template <typename Fwd, typename Bwd>
VarPtr pointwise(Tape& tape, const VarPtr& in, Fwd fwd, Bwd bwd) {
    auto out = make_var(Tensor(in->val.shape));
    const std::int64_t n = in->val.count();
    for (std::int64_t i = 0; i < n; ++i) {
        out->val.v[static_cast<std::size_t>(i)] = fwd(in->val.v[static_cast<std::size_t>(i)]);
    }
    if (any_grad(in)) {
        out->requires_grad = true;
        out->zero_grad();
        tape.push([=]() {
            in->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                in->grad.v[iu] += out->grad.v[iu] * bwd(in->val.v[iu], out->val.v[iu]);
            }
        });
    }
    return out;
}

}  // namespace

VarPtr relu(Tape& tape, const VarPtr& in) {
    return pointwise(
        tape, in, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

VarPtr sigmoid(Tape& tape, const VarPtr& in) {
    return pointwise(
        tape, in, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

VarPtr tanh_op(Tape& tape, const VarPtr& in) {
    return pointwise(
        tape, in, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

VarPtr add(Tape& tape, const VarPtr& a, const VarPtr& b) {
    require_shape(b->val, a->val.shape, "add");
    auto out = make_var(Tensor(a->val.shape));
    const std::int64_t n = a->val.count();
    for (std::int64_t i = 0; i < n; ++i) {
        out->val.v[static_cast<std::size_t>(i)] =
            a->val.v[static_cast<std::size_t>(i)] + b->val.v[static_cast<std::size_t>(i)];
    }
    mark_output(out, {a, b});
    if (out->requires_grad) {
        out->zero_grad();
        tape.push([=]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    a->grad.v[static_cast<std::size_t>(i)] += out->grad.v[static_cast<std::size_t>(i)];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    b->grad.v[static_cast<std::size_t>(i)] += out->grad.v[static_cast<std::size_t>(i)];
            }
        });
    }
    return out;
}

VarPtr mul(Tape& tape, const VarPtr& a, const VarPtr& b) {
    require_shape(b->val, a->val.shape, "mul");
    auto out = make_var(Tensor(a->val.shape));
    const std::int64_t n = a->val.count();
    for (std::int64_t i = 0; i < n; ++i) {
        out->val.v[static_cast<std::size_t>(i)] =
            a->val.v[static_cast<std::size_t>(i)] * b->val.v[static_cast<std::size_t>(i)];
    }
    mark_output(out, {a, b});
    if (out->requires_grad) {
        out->zero_grad();
        tape.push([=]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i) {
                    const auto iu = static_cast<std::size_t>(i);
                    a->grad.v[iu] += out->grad.v[iu] * b->val.v[iu];
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i) {
                    const auto iu = static_cast<std::size_t>(i);
                    b->grad.v[iu] += out->grad.v[iu] * a->val.v[iu];
                }
            }
        });
    }
    return out;
}

VarPtr concat_channels(Tape& tape, const VarPtr& a, const VarPtr& b) {
    const TensorShape& sa = a->val.shape;
    const TensorShape& sb = b->val.shape;
    if (sa.n != sb.n || sa.z != sb.z || sa.y != sb.y || sa.x != sb.x) {
        throw std::invalid_argument("concat_channels: spatial shape mismatch");
    }
    TensorShape so = sa;
    so.c = sa.c + sb.c;
    auto out = make_var(Tensor(so));
    const std::int64_t voxels = out->val.count() / so.c;
    const double* ap = a->val.data();
    const double* bp = b->val.data();
    double* op = out->val.data();
    for (std::int64_t v = 0; v < voxels; ++v) {
        std::memcpy(op + v * so.c, ap + v * sa.c, sizeof(double) * static_cast<std::size_t>(sa.c));
        std::memcpy(op + v * so.c + sa.c, bp + v * sb.c,
                    sizeof(double) * static_cast<std::size_t>(sb.c));
    }
    mark_output(out, {a, b});
    if (out->requires_grad) {
        out->zero_grad();
        tape.push([=]() {
            const double* gp = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                double* ga = a->grad.data();
                for (std::int64_t v = 0; v < voxels; ++v)
                    for (int c = 0; c < sa.c; ++c) ga[v * sa.c + c] += gp[v * so.c + c];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                double* gb = b->grad.data();
                for (std::int64_t v = 0; v < voxels; ++v)
                    for (int c = 0; c < sb.c; ++c) gb[v * sb.c + c] += gp[v * so.c + sa.c + c];
            }
        });
    }
    return out;
}

std::array<VarPtr, 4> split4_channels(Tape& tape, const VarPtr& in) {
    const TensorShape& s = in->val.shape;
    if (s.c % 4 != 0) throw std::invalid_argument("split4_channels: channels not divisible by 4");
    TensorShape sp = s;
    sp.c = s.c / 4;
    const std::int64_t voxels = in->val.count() / s.c;
    std::array<VarPtr, 4> parts;
    for (int q = 0; q < 4; ++q) {
        parts[static_cast<std::size_t>(q)] = make_var(Tensor(sp));
        double* pp = parts[static_cast<std::size_t>(q)]->val.data();
        const double* ip = in->val.data();
        for (std::int64_t v = 0; v < voxels; ++v) {
            std::memcpy(pp + v * sp.c, ip + v * s.c + q * sp.c,
                        sizeof(double) * static_cast<std::size_t>(sp.c));
        }
        if (in->requires_grad) {
            auto part = parts[static_cast<std::size_t>(q)];
            part->requires_grad = true;
            part->zero_grad();
            tape.push([=]() {
                in->ensure_grad();
                double* gi = in->grad.data();
                const double* gp = part->grad.data();
                for (std::int64_t v = 0; v < voxels; ++v)
                    for (int c = 0; c < sp.c; ++c) gi[v * s.c + q * sp.c + c] += gp[v * sp.c + c];
            });
        }
    }
    return parts;
}

VarPtr stack_steps(Tape& tape, const std::vector<VarPtr>& steps) {
    if (steps.empty()) throw std::invalid_argument("stack_steps: empty");
    const TensorShape s = steps.front()->val.shape;
    const int T = static_cast<int>(steps.size());
    TensorShape so = s;
    so.n = s.n * T;
    auto out = make_var(Tensor(so));
    const std::int64_t per = s.count();
    bool needs = false;
    for (int t = 0; t < T; ++t) {
        require_shape(steps[static_cast<std::size_t>(t)]->val, s, "stack_steps");
        std::memcpy(out->val.data() + t * per, steps[static_cast<std::size_t>(t)]->val.data(),
                    sizeof(double) * static_cast<std::size_t>(per));
        needs = needs || steps[static_cast<std::size_t>(t)]->requires_grad;
    }
    if (needs) {
        out->requires_grad = true;
        out->zero_grad();
        auto copies = steps;
        tape.push([out, copies, per]() {
            for (std::size_t t = 0; t < copies.size(); ++t) {
                if (!copies[t]->requires_grad) continue;
                copies[t]->ensure_grad();
                const double* gp = out->grad.data() + static_cast<std::int64_t>(t) * per;
                double* gs = copies[t]->grad.data();
                for (std::int64_t i = 0; i < per; ++i) gs[i] += gp[i];
            }
        });
    }
    return out;
}

VarPtr repeat_steps(Tape& tape, const VarPtr& in, int times) {
    const TensorShape s = in->val.shape;
    TensorShape so = s;
    so.n = s.n * times;
    auto out = make_var(Tensor(so));
    const std::int64_t per = s.count();
    for (int t = 0; t < times; ++t) {
        std::memcpy(out->val.data() + t * per, in->val.data(),
                    sizeof(double) * static_cast<std::size_t>(per));
    }
    if (in->requires_grad) {
        out->requires_grad = true;
        out->zero_grad();
        tape.push([=]() {
            in->ensure_grad();
            double* gi = in->grad.data();
            for (int t = 0; t < times; ++t) {
                const double* gp = out->grad.data() + static_cast<std::int64_t>(t) * per;
                for (std::int64_t i = 0; i < per; ++i) gi[i] += gp[i];
            }
        });
    }
    return out;
}

VarPtr batch_norm(Tape& tape, const VarPtr& in, const VarPtr& gamma, const VarPtr& beta,
                  BatchNormState& state, RunMode mode) {
    const int C = in->val.shape.c;
    if (gamma->val.count() != C || beta->val.count() != C) {
        throw std::invalid_argument("batch norm: parameter length mismatch");
    }
    auto out = make_var(Tensor(in->val.shape));
    if (mode == RunMode::infer) {
        kern::batchnorm_fwd_infer(in->val, gamma->val, beta->val, state.running_mean,
                                  state.running_var, state.eps, out->val);
        mark_output(out, {in, gamma, beta});
        if (out->requires_grad) {
            out->zero_grad();
            const double eps = state.eps;
            Tensor mean = state.running_mean;
            Tensor var = state.running_var;
            tape.push([=]() {
                // infer-mode backward: per-channel affine map
                const std::int64_t m = in->val.count() / C;
                for (int c = 0; c < C; ++c) {
                    const double inv = 1.0 / std::sqrt(var.v[static_cast<std::size_t>(c)] + eps);
                    const double g = gamma->val.v[static_cast<std::size_t>(c)];
                    double sum_g = 0.0, sum_gx = 0.0;
                    for (std::int64_t v = 0; v < m; ++v) {
                        const double go = out->grad.v[static_cast<std::size_t>(v * C + c)];
                        sum_g += go;
                        sum_gx += go * (in->val.v[static_cast<std::size_t>(v * C + c)] -
                                        mean.v[static_cast<std::size_t>(c)]) *
                                  inv;
                    }
                    if (in->requires_grad) {
                        in->ensure_grad();
                        for (std::int64_t v = 0; v < m; ++v) {
                            in->grad.v[static_cast<std::size_t>(v * C + c)] +=
                                out->grad.v[static_cast<std::size_t>(v * C + c)] * g * inv;
                        }
                    }
                    if (gamma->requires_grad) {
                        gamma->ensure_grad();
                        gamma->grad.v[static_cast<std::size_t>(c)] += sum_gx;
                    }
                    if (beta->requires_grad) {
                        beta->ensure_grad();
                        beta->grad.v[static_cast<std::size_t>(c)] += sum_g;
                    }
                }
            });
        }
        return out;
    }

    auto mean = std::make_shared<Tensor>(TensorShape{1, 1, 1, 1, C});
    auto var = std::make_shared<Tensor>(TensorShape{1, 1, 1, 1, C});
    kern::batchnorm_fwd_train(in->val, gamma->val, beta->val, state.eps, out->val, *mean, *var);
    for (int c = 0; c < C; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        state.running_mean.v[cu] =
            state.momentum * state.running_mean.v[cu] + (1.0 - state.momentum) * mean->v[cu];
        state.running_var.v[cu] =
            state.momentum * state.running_var.v[cu] + (1.0 - state.momentum) * var->v[cu];
    }
    mark_output(out, {in, gamma, beta});
    if (out->requires_grad) {
        out->zero_grad();
        const double eps = state.eps;
        tape.push([=]() {
            in->ensure_grad();
            gamma->ensure_grad();
            beta->ensure_grad();
            kern::batchnorm_bwd(out->grad, in->val, gamma->val, *mean, *var, eps, in->grad,
                                gamma->grad, beta->grad);
        });
    }
    return out;
}

VarPtr well_weighted_mse(Tape& tape, const VarPtr& pred, const Tensor& target,
                         const std::vector<int>& well_cells, double lambda_w) {
    require_shape(pred->val, target.shape, "loss target");
    if (lambda_w > 0.0 && well_cells.empty()) {
        throw std::invalid_argument("well-weighted loss requires well cells when lambda > 0");
    }
    const TensorShape& s = pred->val.shape;
    if (s.c != 1) throw std::invalid_argument("loss expects single-channel fields");
    const std::int64_t n_field = pred->val.count();
    const std::int64_t spatial = s.spatial();
    for (int c : well_cells) {
        if (c < 0 || c >= spatial) throw std::invalid_argument("well cell outside field");
    }

    double field_term = 0.0;
    for (std::int64_t i = 0; i < n_field; ++i) {
        const double d = pred->val.v[static_cast<std::size_t>(i)] -
                         target.v[static_cast<std::size_t>(i)];
        field_term += d * d;
    }
    field_term /= static_cast<double>(n_field);

    double well_term = 0.0;
    const std::int64_t n_well = static_cast<std::int64_t>(well_cells.size()) * s.n;
    if (lambda_w > 0.0) {
        for (int b = 0; b < s.n; ++b) {
            for (int c : well_cells) {
                const std::int64_t i = static_cast<std::int64_t>(b) * spatial + c;
                const double d = pred->val.v[static_cast<std::size_t>(i)] -
                                 target.v[static_cast<std::size_t>(i)];
                well_term += d * d;
            }
        }
        well_term /= static_cast<double>(n_well);
    }

    auto out = make_var(Tensor(TensorShape{1, 1, 1, 1, 1}));
    out->val.v[0] = field_term + lambda_w * well_term;
    if (pred->requires_grad) {
        out->requires_grad = true;
        out->zero_grad();
        auto cells = well_cells;
        tape.push([=]() {
            pred->ensure_grad();
            const double g = out->grad.v[0];
            const double wf = 2.0 * g / static_cast<double>(n_field);
            for (std::int64_t i = 0; i < n_field; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                pred->grad.v[iu] += wf * (pred->val.v[iu] - target.v[iu]);
            }
            if (lambda_w > 0.0) {
                const double ww = 2.0 * g * lambda_w / static_cast<double>(n_well);
                for (int b = 0; b < s.n; ++b) {
                    for (int c : cells) {
                        const auto i = static_cast<std::size_t>(
                            static_cast<std::int64_t>(b) * spatial + c);
                        pred->grad.v[i] += ww * (pred->val.v[i] - target.v[i]);
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace mfres
