#pragma once

#include "mfres/discrete.hpp"
#include "mfres/geomodel.hpp"
#include "mfres/wells.hpp"

#include <string>
#include <vector>

namespace mfres {

// Steady single-phase pressure solution with unit mobility. Fluxes are
// oriented along +x/+y/+z: f = T * (p_low_index - p_high_index), and well
// perforation flow is WI * (p_cell - bhp) (positive = out of the reservoir).
struct SinglePhaseSolution {
    std::vector<double> pressure;  // per cell, bar
    std::vector<double> flux_x, flux_y, flux_z;
    struct WellFlow {
        std::string name;
        double bhp = 0.0;
        std::vector<int> cells;
        std::vector<double> flow;  // per perforation
    };
    std::vector<WellFlow> wells;
};

// Errors if there are no wells or all BHPs coincide (singular problem).
SinglePhaseSolution solve_single_phase(const DiscreteModel& model);

struct CoarseWellEntry {
    std::string name;
    int i = 0, j = 0;             // coarse column
    std::vector<int> layers;      // coarse layers with at least one fine perforation
    std::vector<double> wi;       // WI* per entry of `layers`
    std::vector<std::uint8_t> anomaly;
};

struct CoarseModel {
    Grid grid;  // coarse grid
    int rx = 1, ry = 1, rz = 1;
    std::vector<double> poro;        // pore-volume-weighted
    std::vector<double> tx, ty, tz;  // upscaled face transmissibilities, md*m
    std::vector<std::uint8_t> tx_anomaly, ty_anomaly, tz_anomaly;
    std::vector<CoarseWellEntry> wells;

    void validate() const;
};

struct UpscaleOptions {
    int rx = 2, ry = 2, rz = 2;
    // |mean-pressure drop| below this fraction of the BHP spread, negative
    // T*, or T* above `t_cap_factor` times the aggregated harmonic T marks
    // the face anomalous.
    double dp_floor_fraction = 1e-8;
    double t_cap_factor = 50.0;
};

// Aggregated harmonic-average transmissibility of the fine cells between the
// centers of two adjacent coarse blocks; the anomaly fallback value.
double coarse_face_harmonic_t(const FineGeomodel& fine, const UpscaleOptions& opt, int axis,
                              int ci, int cj, int ck);

struct FaceTransmissibilities {
    std::vector<double> tx, ty, tz;
    std::vector<std::uint8_t> tx_anomaly, ty_anomaly, tz_anomaly;
};

FaceTransmissibilities upscale_transmissibility(const FineGeomodel& fine,
                                                const SinglePhaseSolution& sol,
                                                const UpscaleOptions& opt);

std::vector<CoarseWellEntry> upscale_well_index(const FineGeomodel& fine,
                                                const SinglePhaseSolution& sol,
                                                const std::vector<WellSpec>& wells,
                                                const UpscaleOptions& opt);

// Full pipeline: fine single-phase solve + Eq.-style flux/pressure averaging.
CoarseModel upscale(const FineGeomodel& fine, const std::vector<WellSpec>& wells,
                    const UpscaleOptions& opt);

// coarse model file: JSON header + raw f64 blobs + well CSV
void save_coarse_model(const CoarseModel& model, const std::string& path);
CoarseModel load_coarse_model(const std::string& path);

}  // namespace mfres
