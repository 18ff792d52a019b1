#pragma once

#include "mfres/autodiff.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace mfres {

struct Param {
    std::string name;
    std::string group;  // enc | lstm | dec | head_lf | head_hf
    VarPtr var;
};

// Bias-corrected Adam over a fixed set of parameters. One instance per
// training phase; the step counter is shared across parameters.
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void set_lr(double lr) { lr_ = lr; }
    int step_count() const { return t_; }

    void step(const std::vector<Param>& params);

private:
    struct Moments {
        Tensor m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::unordered_map<Var*, Moments> state_;
};

}  // namespace mfres
