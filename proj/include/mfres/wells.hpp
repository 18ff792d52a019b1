#pragma once

#include <string>
#include <vector>

namespace mfres {

enum class WellType { injector, producer };

// BHP-controlled vertical well completed over a contiguous layer range of
// one (i, j) column. Layers are 0-based and inclusive.
struct WellSpec {
    std::string name;
    WellType type = WellType::producer;
    int i = 0, j = 0;
    int k_top = 0, k_bottom = 0;
    double bhp = 0.0;   // bar, at the uppermost perforation
    double r_w = 0.1;   // m
};

// Peaceman well index for a vertical segment fully penetrating the block,
// isotropic permeability, dx = dy. Units: md*m.
double well_index(double perm_md, double dz_m, double dx_m, double r_w_m);

}  // namespace mfres
