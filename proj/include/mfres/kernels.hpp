#pragma once

#include "mfres/tensor.hpp"

#include <array>

namespace mfres {

using Stride3 = std::array<int, 3>;  // (sz, sy, sx) order matching tensor axes

// SAME-padded output extent; the input must be divisible by the stride.
int conv_out_dim(int in, int stride);
// Low-side padding for SAME semantics (high side gets the remainder).
int conv_pad_lo(int in, int kernel, int stride);

TensorShape conv3d_out_shape(const TensorShape& in, const TensorShape& kernel, Stride3 stride);
TensorShape deconv3d_out_shape(const TensorShape& in, const TensorShape& kernel, Stride3 stride);

// Production kernels: OpenMP-parallel over independent output elements with
// fixed-order inner reductions, so results are bit-identical for any thread
// count. The mfres::ref mirrors are plain serial loops kept as the testing
// and benchmarking reference.
namespace kern {

// kernel tensor layout: (n=out_ch, z=kz, y=ky, x=kx, c=in_ch)
void conv3d_fwd(const Tensor& in, const Tensor& kernel, const Tensor& bias, Stride3 stride,
                Tensor& out);
void conv3d_bwd_input(const Tensor& gout, const Tensor& kernel, Stride3 stride, Tensor& gin);
void conv3d_bwd_kernel(const Tensor& gout, const Tensor& in, Stride3 stride, Tensor& gkernel);
void conv3d_bwd_bias(const Tensor& gout, Tensor& gbias);

void batchnorm_fwd_train(const Tensor& in, const Tensor& gamma, const Tensor& beta, double eps,
                         Tensor& out, Tensor& mean, Tensor& var);
void batchnorm_fwd_infer(const Tensor& in, const Tensor& gamma, const Tensor& beta,
                         const Tensor& mean, const Tensor& var, double eps, Tensor& out);
void batchnorm_bwd(const Tensor& gout, const Tensor& in, const Tensor& gamma, const Tensor& mean,
                   const Tensor& var, double eps, Tensor& gin, Tensor& ggamma, Tensor& gbeta);

}  // namespace kern

namespace ref {

void conv3d_fwd(const Tensor& in, const Tensor& kernel, const Tensor& bias, Stride3 stride,
                Tensor& out);
void conv3d_bwd_input(const Tensor& gout, const Tensor& kernel, Stride3 stride, Tensor& gin);
void conv3d_bwd_kernel(const Tensor& gout, const Tensor& in, Stride3 stride, Tensor& gkernel);
void conv3d_bwd_bias(const Tensor& gout, Tensor& gbias);

}  // namespace ref

}  // namespace mfres
