#include "mfres/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfres {

int conv_out_dim(int in, int stride) {
    if (stride < 1 || in % stride != 0) {
        throw std::invalid_argument("input extent must be divisible by stride");
    }
    return in / stride;
}

int conv_pad_lo(int in, int kernel, int stride) {
    const int out = in / stride;
    const int total = std::max((out - 1) * stride + kernel - in, 0);
    return total / 2;
}

TensorShape conv3d_out_shape(const TensorShape& in, const TensorShape& kernel, Stride3 stride) {
    if (in.c != kernel.c) throw std::invalid_argument("conv3d: channel mismatch");
    return {in.n, conv_out_dim(in.z, stride[0]), conv_out_dim(in.y, stride[1]),
            conv_out_dim(in.x, stride[2]), kernel.n};
}

TensorShape deconv3d_out_shape(const TensorShape& in, const TensorShape& kernel, Stride3 stride) {
    // adjoint of a conv whose output is `in`: kernel out_ch must equal input channels
    if (in.c != kernel.n) throw std::invalid_argument("deconv3d: channel mismatch");
    return {in.n, in.z * stride[0], in.y * stride[1], in.x * stride[2], kernel.c};
}

namespace {

struct ConvDims {
    int N, IZ, IY, IX, IC;
    int OZ, OY, OX, OC;
    int KZ, KY, KX;
    int SZ, SY, SX;
    int PZ, PY, PX;
};

ConvDims make_dims(const TensorShape& in, const TensorShape& kernel, Stride3 stride) {
    ConvDims d;
    d.N = in.n; d.IZ = in.z; d.IY = in.y; d.IX = in.x; d.IC = in.c;
    d.SZ = stride[0]; d.SY = stride[1]; d.SX = stride[2];
    d.OZ = conv_out_dim(in.z, d.SZ); d.OY = conv_out_dim(in.y, d.SY);
    d.OX = conv_out_dim(in.x, d.SX); d.OC = kernel.n;
    d.KZ = kernel.z; d.KY = kernel.y; d.KX = kernel.x;
    d.PZ = conv_pad_lo(in.z, d.KZ, d.SZ);
    d.PY = conv_pad_lo(in.y, d.KY, d.SY);
    d.PX = conv_pad_lo(in.x, d.KX, d.SX);
    return d;
}

template <bool Parallel>
void conv3d_fwd_impl(const Tensor& in, const Tensor& kernel, const Tensor& bias, Stride3 stride,
                     Tensor& out) {
    const ConvDims d = make_dims(in.shape, kernel.shape, stride);
    require_shape(out, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d output");
    if (bias.count() != d.OC) throw std::invalid_argument("conv3d: bias length mismatch");
    const double* ip = in.data();
    const double* kp = kernel.data();
    const double* bp = bias.data();
    double* op = out.data();
    const std::int64_t in_row = d.IC;
    const std::int64_t krow = d.IC;

#pragma omp parallel for collapse(2) schedule(static) if (Parallel && !omp_in_parallel())
    for (int n = 0; n < d.N; ++n) {
        for (int zo = 0; zo < d.OZ; ++zo) {
            std::vector<double> acc(static_cast<std::size_t>(d.OC));
            for (int yo = 0; yo < d.OY; ++yo) {
                for (int xo = 0; xo < d.OX; ++xo) {
                    for (int oc = 0; oc < d.OC; ++oc) acc[static_cast<std::size_t>(oc)] = bp[oc];
                    for (int kz = 0; kz < d.KZ; ++kz) {
                        const int zi = zo * d.SZ - d.PZ + kz;
                        if (zi < 0 || zi >= d.IZ) continue;
                        for (int ky = 0; ky < d.KY; ++ky) {
                            const int yi = yo * d.SY - d.PY + ky;
                            if (yi < 0 || yi >= d.IY) continue;
                            for (int kx = 0; kx < d.KX; ++kx) {
                                const int xi = xo * d.SX - d.PX + kx;
                                if (xi < 0 || xi >= d.IX) continue;
                                const double* irow =
                                    ip + ((((static_cast<std::int64_t>(n) * d.IZ + zi) * d.IY + yi) *
                                               d.IX +
                                           xi) *
                                          in_row);
                                const double* kbase =
                                    kp + (((static_cast<std::int64_t>(kz) * d.KY + ky) * d.KX + kx) *
                                          krow);
                                const std::int64_t kstep =
                                    static_cast<std::int64_t>(d.KZ) * d.KY * d.KX * krow;
                                for (int oc = 0; oc < d.OC; ++oc) {
                                    const double* krow_p = kbase + oc * kstep;
                                    double s = 0.0;
                                    for (int ic = 0; ic < d.IC; ++ic) s += irow[ic] * krow_p[ic];
                                    acc[static_cast<std::size_t>(oc)] += s;
                                }
                            }
                        }
                    }
                    double* orow =
                        op + ((((static_cast<std::int64_t>(n) * d.OZ + zo) * d.OY + yo) * d.OX +
                               xo) *
                              d.OC);
                    for (int oc = 0; oc < d.OC; ++oc) orow[oc] = acc[static_cast<std::size_t>(oc)];
                }
            }
        }
    }
}

template <bool Parallel>
void conv3d_bwd_input_impl(const Tensor& gout, const Tensor& kernel, Stride3 stride, Tensor& gin) {
    // shapes: gin has the conv input shape, gout the conv output shape
    const ConvDims d = make_dims(gin.shape, kernel.shape, stride);
    require_shape(gout, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d grad-output");
    const double* gp = gout.data();
    const double* kp = kernel.data();
    double* gi = gin.data();
    const std::int64_t krow = d.IC;
    const std::int64_t kstep = static_cast<std::int64_t>(d.KZ) * d.KY * d.KX * krow;

#pragma omp parallel for collapse(2) schedule(static) if (Parallel && !omp_in_parallel())
    for (int n = 0; n < d.N; ++n) {
        for (int zi = 0; zi < d.IZ; ++zi) {
            std::vector<double> acc(static_cast<std::size_t>(d.IC));
            for (int yi = 0; yi < d.IY; ++yi) {
                for (int xi = 0; xi < d.IX; ++xi) {
                    std::fill(acc.begin(), acc.end(), 0.0);
                    for (int kz = 0; kz < d.KZ; ++kz) {
                        const int zn = zi + d.PZ - kz;
                        if (zn < 0 || zn % d.SZ != 0) continue;
                        const int zo = zn / d.SZ;
                        if (zo >= d.OZ) continue;
                        for (int ky = 0; ky < d.KY; ++ky) {
                            const int yn = yi + d.PY - ky;
                            if (yn < 0 || yn % d.SY != 0) continue;
                            const int yo = yn / d.SY;
                            if (yo >= d.OY) continue;
                            for (int kx = 0; kx < d.KX; ++kx) {
                                const int xn = xi + d.PX - kx;
                                if (xn < 0 || xn % d.SX != 0) continue;
                                const int xo = xn / d.SX;
                                if (xo >= d.OX) continue;
                                const double* grow =
                                    gp + ((((static_cast<std::int64_t>(n) * d.OZ + zo) * d.OY + yo) *
                                               d.OX +
                                           xo) *
                                          d.OC);
                                const double* kbase =
                                    kp + (((static_cast<std::int64_t>(kz) * d.KY + ky) * d.KX + kx) *
                                          krow);
                                for (int oc = 0; oc < d.OC; ++oc) {
                                    const double g = grow[oc];
                                    if (g == 0.0) continue;
                                    const double* krow_p = kbase + oc * kstep;
                                    for (int ic = 0; ic < d.IC; ++ic) {
                                        acc[static_cast<std::size_t>(ic)] += g * krow_p[ic];
                                    }
                                }
                            }
                        }
                    }
                    double* gin_row =
                        gi + ((((static_cast<std::int64_t>(n) * d.IZ + zi) * d.IY + yi) * d.IX +
                               xi) *
                              d.IC);
                    for (int ic = 0; ic < d.IC; ++ic) gin_row[ic] += acc[static_cast<std::size_t>(ic)];
                }
            }
        }
    }
}

template <bool Parallel>
void conv3d_bwd_kernel_impl(const Tensor& gout, const Tensor& in, Stride3 stride,
                            Tensor& gkernel) {
    const ConvDims d = make_dims(in.shape, gkernel.shape, stride);
    require_shape(gout, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d grad-output");
    const double* gp = gout.data();
    const double* ip = in.data();
    double* gk = gkernel.data();
    const std::int64_t krow = d.IC;
    const std::int64_t kstep = static_cast<std::int64_t>(d.KZ) * d.KY * d.KX * krow;

#pragma omp parallel for schedule(static) if (Parallel && !omp_in_parallel())
    for (int oc = 0; oc < d.OC; ++oc) {
        double* kslice = gk + oc * kstep;
        for (int n = 0; n < d.N; ++n) {
            for (int zo = 0; zo < d.OZ; ++zo) {
                for (int yo = 0; yo < d.OY; ++yo) {
                    for (int xo = 0; xo < d.OX; ++xo) {
                        const double g =
                            gp[((((static_cast<std::int64_t>(n) * d.OZ + zo) * d.OY + yo) * d.OX +
                                 xo) *
                                d.OC) +
                               oc];
                        if (g == 0.0) continue;
                        for (int kz = 0; kz < d.KZ; ++kz) {
                            const int zi = zo * d.SZ - d.PZ + kz;
                            if (zi < 0 || zi >= d.IZ) continue;
                            for (int ky = 0; ky < d.KY; ++ky) {
                                const int yi = yo * d.SY - d.PY + ky;
                                if (yi < 0 || yi >= d.IY) continue;
                                for (int kx = 0; kx < d.KX; ++kx) {
                                    const int xi = xo * d.SX - d.PX + kx;
                                    if (xi < 0 || xi >= d.IX) continue;
                                    const double* irow =
                                        ip +
                                        ((((static_cast<std::int64_t>(n) * d.IZ + zi) * d.IY + yi) *
                                              d.IX +
                                          xi) *
                                         d.IC);
                                    double* krow_p =
                                        kslice +
                                        (((static_cast<std::int64_t>(kz) * d.KY + ky) * d.KX + kx) *
                                         krow);
                                    for (int ic = 0; ic < d.IC; ++ic) krow_p[ic] += g * irow[ic];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

template <bool Parallel>
void conv3d_bwd_bias_impl(const Tensor& gout, Tensor& gbias) {
    const int oc_count = gout.shape.c;
    if (gbias.count() != oc_count) throw std::invalid_argument("bias grad length mismatch");
    const std::int64_t voxels = gout.count() / oc_count;
    const double* gp = gout.data();
    double* gb = gbias.data();
#pragma omp parallel for schedule(static) if (Parallel && !omp_in_parallel())
    for (int oc = 0; oc < oc_count; ++oc) {
        double s = 0.0;
        for (std::int64_t v = 0; v < voxels; ++v) s += gp[v * oc_count + oc];
        gb[oc] += s;
    }
}

}  // namespace

namespace kern {

void conv3d_fwd(const Tensor& in, const Tensor& kernel, const Tensor& bias, Stride3 stride,
                Tensor& out) {
    conv3d_fwd_impl<true>(in, kernel, bias, stride, out);
}
void conv3d_bwd_input(const Tensor& gout, const Tensor& kernel, Stride3 stride, Tensor& gin) {
    conv3d_bwd_input_impl<true>(gout, kernel, stride, gin);
}
void conv3d_bwd_kernel(const Tensor& gout, const Tensor& in, Stride3 stride, Tensor& gkernel) {
    conv3d_bwd_kernel_impl<true>(gout, in, stride, gkernel);
}
void conv3d_bwd_bias(const Tensor& gout, Tensor& gbias) { conv3d_bwd_bias_impl<true>(gout, gbias); }

void batchnorm_fwd_train(const Tensor& in, const Tensor& gamma, const Tensor& beta, double eps,
                         Tensor& out, Tensor& mean, Tensor& var) {
    const int C = in.shape.c;
    const std::int64_t m = in.count() / C;
    if (m < 2) throw std::invalid_argument("batch norm training requires at least 2 rows");
    require_shape(out, in.shape, "batch norm output");
    const double* ip = in.data();
    double* op = out.data();
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
    for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        for (std::int64_t v = 0; v < m; ++v) sum += ip[v * C + c];
        const double mu = sum / static_cast<double>(m);
        double sq = 0.0;
        for (std::int64_t v = 0; v < m; ++v) {
            const double d = ip[v * C + c] - mu;
            sq += d * d;
        }
        const double s2 = sq / static_cast<double>(m);
        mean.v[static_cast<std::size_t>(c)] = mu;
        var.v[static_cast<std::size_t>(c)] = s2;
        const double inv = 1.0 / std::sqrt(s2 + eps);
        const double g = gamma.v[static_cast<std::size_t>(c)];
        const double b = beta.v[static_cast<std::size_t>(c)];
        for (std::int64_t v = 0; v < m; ++v) {
            op[v * C + c] = g * (ip[v * C + c] - mu) * inv + b;
        }
    }
}

void batchnorm_fwd_infer(const Tensor& in, const Tensor& gamma, const Tensor& beta,
                         const Tensor& mean, const Tensor& var, double eps, Tensor& out) {
    const int C = in.shape.c;
    const std::int64_t m = in.count() / C;
    require_shape(out, in.shape, "batch norm output");
    const double* ip = in.data();
    double* op = out.data();
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
    for (int c = 0; c < C; ++c) {
        const double inv = 1.0 / std::sqrt(var.v[static_cast<std::size_t>(c)] + eps);
        const double g = gamma.v[static_cast<std::size_t>(c)];
        const double b = beta.v[static_cast<std::size_t>(c)];
        const double mu = mean.v[static_cast<std::size_t>(c)];
        for (std::int64_t v = 0; v < m; ++v) op[v * C + c] = g * (ip[v * C + c] - mu) * inv + b;
    }
}

void batchnorm_bwd(const Tensor& gout, const Tensor& in, const Tensor& gamma, const Tensor& mean,
                   const Tensor& var, double eps, Tensor& gin, Tensor& ggamma, Tensor& gbeta) {
    const int C = in.shape.c;
    const std::int64_t m = in.count() / C;
    const double* gp = gout.data();
    const double* ip = in.data();
    double* gi = gin.data();
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
    for (int c = 0; c < C; ++c) {
        const double mu = mean.v[static_cast<std::size_t>(c)];
        const double inv = 1.0 / std::sqrt(var.v[static_cast<std::size_t>(c)] + eps);
        const double g = gamma.v[static_cast<std::size_t>(c)];
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::int64_t v = 0; v < m; ++v) {
            const double go = gp[v * C + c];
            sum_g += go;
            sum_gx += go * (ip[v * C + c] - mu) * inv;
        }
        gbeta.v[static_cast<std::size_t>(c)] += sum_g;
        ggamma.v[static_cast<std::size_t>(c)] += sum_gx;
        const double mm = static_cast<double>(m);
        for (std::int64_t v = 0; v < m; ++v) {
            const double xhat = (ip[v * C + c] - mu) * inv;
            const double go = gp[v * C + c];
            gi[v * C + c] += g * inv * (go - sum_g / mm - xhat * sum_gx / mm);
        }
    }
}

}  // namespace kern

namespace ref {

// Naive element-at-a-time loops, deliberately independent of the tuned
// kernels above.

void conv3d_fwd(const Tensor& in, const Tensor& kernel, const Tensor& bias, Stride3 stride,
                Tensor& out) {
    const ConvDims d = make_dims(in.shape, kernel.shape, stride);
    require_shape(out, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d output");
    for (int n = 0; n < d.N; ++n)
        for (int zo = 0; zo < d.OZ; ++zo)
            for (int yo = 0; yo < d.OY; ++yo)
                for (int xo = 0; xo < d.OX; ++xo)
                    for (int oc = 0; oc < d.OC; ++oc) {
                        double acc = bias.v[static_cast<std::size_t>(oc)];
                        for (int kz = 0; kz < d.KZ; ++kz)
                            for (int ky = 0; ky < d.KY; ++ky)
                                for (int kx = 0; kx < d.KX; ++kx)
                                    for (int ic = 0; ic < d.IC; ++ic) {
                                        const int zi = zo * d.SZ - d.PZ + kz;
                                        const int yi = yo * d.SY - d.PY + ky;
                                        const int xi = xo * d.SX - d.PX + kx;
                                        if (zi < 0 || zi >= d.IZ || yi < 0 || yi >= d.IY ||
                                            xi < 0 || xi >= d.IX)
                                            continue;
                                        acc += in.at(n, zi, yi, xi, ic) *
                                               kernel.at(oc, kz, ky, kx, ic);
                                    }
                        out.at(n, zo, yo, xo, oc) = acc;
                    }
}

void conv3d_bwd_input(const Tensor& gout, const Tensor& kernel, Stride3 stride, Tensor& gin) {
    const ConvDims d = make_dims(gin.shape, kernel.shape, stride);
    require_shape(gout, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d grad-output");
    for (int n = 0; n < d.N; ++n)
        for (int zo = 0; zo < d.OZ; ++zo)
            for (int yo = 0; yo < d.OY; ++yo)
                for (int xo = 0; xo < d.OX; ++xo)
                    for (int oc = 0; oc < d.OC; ++oc) {
                        const double g = gout.at(n, zo, yo, xo, oc);
                        for (int kz = 0; kz < d.KZ; ++kz)
                            for (int ky = 0; ky < d.KY; ++ky)
                                for (int kx = 0; kx < d.KX; ++kx)
                                    for (int ic = 0; ic < d.IC; ++ic) {
                                        const int zi = zo * d.SZ - d.PZ + kz;
                                        const int yi = yo * d.SY - d.PY + ky;
                                        const int xi = xo * d.SX - d.PX + kx;
                                        if (zi < 0 || zi >= d.IZ || yi < 0 || yi >= d.IY ||
                                            xi < 0 || xi >= d.IX)
                                            continue;
                                        gin.at(n, zi, yi, xi, ic) +=
                                            g * kernel.at(oc, kz, ky, kx, ic);
                                    }
                    }
}

void conv3d_bwd_kernel(const Tensor& gout, const Tensor& in, Stride3 stride, Tensor& gkernel) {
    const ConvDims d = make_dims(in.shape, gkernel.shape, stride);
    require_shape(gout, {d.N, d.OZ, d.OY, d.OX, d.OC}, "conv3d grad-output");
    for (int n = 0; n < d.N; ++n)
        for (int zo = 0; zo < d.OZ; ++zo)
            for (int yo = 0; yo < d.OY; ++yo)
                for (int xo = 0; xo < d.OX; ++xo)
                    for (int oc = 0; oc < d.OC; ++oc) {
                        const double g = gout.at(n, zo, yo, xo, oc);
                        for (int kz = 0; kz < d.KZ; ++kz)
                            for (int ky = 0; ky < d.KY; ++ky)
                                for (int kx = 0; kx < d.KX; ++kx)
                                    for (int ic = 0; ic < d.IC; ++ic) {
                                        const int zi = zo * d.SZ - d.PZ + kz;
                                        const int yi = yo * d.SY - d.PY + ky;
                                        const int xi = xo * d.SX - d.PX + kx;
                                        if (zi < 0 || zi >= d.IZ || yi < 0 || yi >= d.IY ||
                                            xi < 0 || xi >= d.IX)
                                            continue;
                                        gkernel.at(oc, kz, ky, kx, ic) +=
                                            g * in.at(n, zi, yi, xi, ic);
                                    }
                    }
}

void conv3d_bwd_bias(const Tensor& gout, Tensor& gbias) {
    const int C = gout.shape.c;
    const std::int64_t voxels = gout.count() / C;
    for (std::int64_t v = 0; v < voxels; ++v)
        for (int oc = 0; oc < C; ++oc)
            gbias.v[static_cast<std::size_t>(oc)] += gout.data()[v * C + oc];
}

}  // namespace ref

}  // namespace mfres
