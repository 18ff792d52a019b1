#pragma once

#include <stdexcept>

namespace mfres {

// Volumetric flow in m3/day from transmissibility in md*m, pressure in bar,
// viscosity in cp.
inline constexpr double kDarcy = 8.527017e-3;
// Hydrostatic pressure in bar from density in kg/m3, g in m/s2, depth in m.
inline constexpr double kPaPerBar = 1.0e5;

// Corey-type relative permeability with residual saturations.
struct RelPerm {
    double s_wr = 0.1;
    double s_or = 0.2;
    double n_w = 2.0;
    double n_o = 2.0;
    double krw_end = 0.7;
    double kro_end = 0.9;

    double mobile_span() const { return 1.0 - s_wr - s_or; }

    double krw(double sw) const {
        const double s = (sw - s_wr) / mobile_span();
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return krw_end;
        return krw_end * std::pow(s, n_w);
    }
    double dkrw_dsw(double sw) const {
        const double s = (sw - s_wr) / mobile_span();
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return krw_end * n_w * std::pow(s, n_w - 1.0) / mobile_span();
    }
    double kro(double sw) const {
        const double s = (1.0 - sw - s_or) / mobile_span();
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return kro_end;
        return kro_end * std::pow(s, n_o);
    }
    double dkro_dsw(double sw) const {
        const double s = (1.0 - sw - s_or) / mobile_span();
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return -kro_end * n_o * std::pow(s, n_o - 1.0) / mobile_span();
    }
};

struct FluidProps {
    double mu_w = 0.31;       // cp, constant
    double mu_o_ref = 1.14;   // cp at p_ref
    double p_ref = 325.0;     // bar
    double c_mu = 0.0;        // 1/bar; mu_o(p) = mu_o_ref / (1 + c_mu (p - p_ref))
    double rho_w_ref = 1000.0;  // kg/m3 at p_ref
    double rho_o_ref = 800.0;
    double c_w = 4.0e-5;  // 1/bar
    double c_o = 1.0e-4;
    RelPerm relperm;

    double mu_o(double p) const { return mu_o_ref / (1.0 + c_mu * (p - p_ref)); }
    double dmu_o_dp(double p) const {
        const double d = 1.0 + c_mu * (p - p_ref);
        return -mu_o_ref * c_mu / (d * d);
    }
    double rho_w(double p) const { return rho_w_ref * (1.0 + c_w * (p - p_ref)); }
    double drho_w_dp() const { return rho_w_ref * c_w; }
    double rho_o(double p) const { return rho_o_ref * (1.0 + c_o * (p - p_ref)); }
    double drho_o_dp() const { return rho_o_ref * c_o; }

    void validate() const {
        if (mu_w <= 0.0 || mu_o_ref <= 0.0) throw std::invalid_argument("viscosities must be positive");
        if (rho_w_ref <= 0.0 || rho_o_ref <= 0.0) throw std::invalid_argument("densities must be positive");
        if (relperm.mobile_span() <= 0.0) throw std::invalid_argument("no mobile saturation range");
    }
};

}  // namespace mfres
