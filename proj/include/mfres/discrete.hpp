#pragma once

#include "mfres/geomodel.hpp"
#include "mfres/wells.hpp"

#include <string>
#include <vector>

namespace mfres {

struct CoarseModel;  // upscaler.hpp

// Grid-plus-coefficients form both simulators operate on: per-cell porosity,
// per-interior-face transmissibilities and resolved well perforations. Built
// either from a fine geomodel (harmonic-average T, Peaceman WI) or from an
// upscaled coarse model (stored T*, WI*).
struct DiscreteModel {
    Grid grid;
    std::vector<double> poro;   // per cell
    std::vector<double> tx;     // (nx-1) * ny * nz, md*m
    std::vector<double> ty;     // nx * (ny-1) * nz
    std::vector<double> tz;     // nx * ny * (nz-1)
    struct Perforation {
        int cell = 0;
        double wi = 0.0;  // md*m
    };
    struct Well {
        std::string name;
        WellType type = WellType::producer;
        double bhp = 0.0;
        std::vector<Perforation> perfs;  // ordered top to bottom
    };
    std::vector<Well> wells;

    int fx(int i, int j, int k) const { return i + (grid.nx - 1) * (j + grid.ny * k); }
    int fy(int i, int j, int k) const { return i + grid.nx * (j + (grid.ny - 1) * k); }
    int fz(int i, int j, int k) const { return i + grid.nx * (j + grid.ny * k); }

    double pore_volume(int c) const { return grid.cell_volume() * poro[static_cast<std::size_t>(c)]; }
    void validate() const;
};

DiscreteModel discretize(const FineGeomodel& model, const std::vector<WellSpec>& wells);
DiscreteModel discretize(const CoarseModel& model, const std::vector<WellSpec>& wells);

}  // namespace mfres
