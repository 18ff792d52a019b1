#pragma once

#include "mfres/discrete.hpp"
#include "mfres/fluids.hpp"
#include "mfres/geomodel.hpp"
#include "mfres/upscaler.hpp"
#include "mfres/wells.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mfres {

struct Schedule {
    double total_time = 1000.0;     // days
    std::vector<double> snapshots;  // strictly increasing, last == total_time
    double dt_init = 1.0;
    double dt_growth = 2.0;
    double dt_max = 50.0;
    double dt_min = 1e-3;
    int max_newton = 12;
    double newton_tol = 1e-6;   // scaled per-cell mass residual
    double init_pressure = 325.0;  // bar at the top-layer cell centers
    double init_sw = 0.1;
    double gravity = 9.81;  // m/s^2, 0 disables gravity terms
    void validate() const;
};

// The paper's reported output days over a 1000-day run; scaled
// proportionally for other horizons.
std::vector<double> default_snapshot_days(double total_time = 1000.0);

struct SimResult {
    Grid grid;
    std::vector<double> snapshot_days;
    // snapshot-major, x-fastest cell order
    std::vector<std::vector<double>> pressure;    // bar
    std::vector<std::vector<double>> saturation;  // water
    std::vector<std::string> well_names;
    std::vector<WellType> well_types;
    // rates[w][0] = water, rates[w][1] = oil; m3/day at reference density,
    // positive for both injection and production
    std::vector<std::array<std::vector<double>, 2>> rates;

    struct StepLog {
        double t_start = 0.0, dt = 0.0;
        int newton_iters = 0;
        double max_scaled_residual = 0.0;
    };
    std::vector<StepLog> steps;  // in-memory convergence log
    int n_steps = 0;
    int n_newton = 0;
    int producer_clamp_events = 0;
};

// Per-well rates from perforation states; also used to post-process
// surrogate field predictions into well responses.
struct WellRateResult {
    double water = 0.0, oil = 0.0;        // m3/day at reference density
    std::vector<double> wellbore_pressure;  // per perforation, bar
    bool clamped = false;
};
WellRateResult well_rates(std::span<const double> p_perf, std::span<const double> sw_perf,
                          std::span<const double> wi, std::span<const double> depth,
                          WellType type, double bhp, const FluidProps& fluids, double gravity);

SimResult simulate(const DiscreteModel& model, const FluidProps& fluids, const Schedule& schedule);
SimResult simulate(const FineGeomodel& model, const FluidProps& fluids,
                   const std::vector<WellSpec>& wells, const Schedule& schedule);
SimResult simulate(const CoarseModel& model, const FluidProps& fluids,
                   const std::vector<WellSpec>& wells, const Schedule& schedule);

// sim result file: JSON header + raw f64 P and S blobs + rate CSV
void save_sim_result(const SimResult& result, const std::string& path);
SimResult load_sim_result(const std::string& path);

}  // namespace mfres
