#include "mfres/adam.hpp"

#include <cmath>

namespace mfres {

void Adam::step(const std::vector<Param>& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (const auto& p : params) {
        Var& var = *p.var;
        var.ensure_grad();
        auto& mom = state_[&var];
        if (mom.m.count() != var.val.count()) {
            mom.m = Tensor(var.val.shape);
            mom.v = Tensor(var.val.shape);
        }
        const std::int64_t n = var.val.count();
        for (std::int64_t i = 0; i < n; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            const double g = var.grad.v[iu];
            mom.m.v[iu] = beta1_ * mom.m.v[iu] + (1.0 - beta1_) * g;
            mom.v.v[iu] = beta2_ * mom.v.v[iu] + (1.0 - beta2_) * g * g;
            const double mhat = mom.m.v[iu] / bc1;
            const double vhat = mom.v.v[iu] / bc2;
            var.val.v[iu] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace mfres
