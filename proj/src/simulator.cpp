#include "mfres/simulator.hpp"

#include "mfres/blobfile.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfres {

void Schedule::validate() const {
    if (total_time <= 0.0) throw std::invalid_argument("total time must be positive");
    if (snapshots.empty()) throw std::invalid_argument("schedule needs snapshot times");
    double prev = 0.0;
    for (double t : snapshots) {
        if (t <= prev) throw std::invalid_argument("snapshot times must be strictly increasing");
        prev = t;
    }
    if (std::abs(snapshots.back() - total_time) > 1e-12) {
        throw std::invalid_argument("last snapshot must equal total time");
    }
    if (dt_init <= 0.0 || dt_growth < 1.0 || dt_max < dt_init || dt_min <= 0.0) {
        throw std::invalid_argument("invalid time-step controller");
    }
    if (init_sw < 0.0 || init_sw > 1.0) throw std::invalid_argument("invalid initial saturation");
}

std::vector<double> default_snapshot_days(double total_time) {
    const double base[] = {50, 100, 150, 300, 400, 500, 600, 700, 850, 1000};
    std::vector<double> days;
    for (double d : base) days.push_back(d * total_time / 1000.0);
    return days;
}

namespace {

struct WellboreColumn {
    std::vector<double> pw;  // wellbore pressure per perforation
};

// Wellbore pressure marched down the perforations with the average fluid
// density between them; injectors carry water, producers the produced
// mixture (mobility-weighted).
WellboreColumn wellbore_pressures(const DiscreteModel::Well& well,
                                  std::span<const double> p_perf,
                                  std::span<const double> sw_perf,
                                  std::span<const double> depth, const FluidProps& fluids,
                                  double gravity) {
    WellboreColumn col;
    const std::size_t n = p_perf.size();
    col.pw.resize(n);
    std::vector<double> rho(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double p = p_perf[m];
        if (well.type == WellType::injector) {
            rho[m] = fluids.rho_w(p);
        } else {
            const double lw = fluids.relperm.krw(sw_perf[m]) / fluids.mu_w;
            const double lo = fluids.relperm.kro(sw_perf[m]) / fluids.mu_o(p);
            const double lt = lw + lo;
            rho[m] = lt > 0.0 ? (lw * fluids.rho_w(p) + lo * fluids.rho_o(p)) / lt
                              : fluids.rho_o(p);
        }
    }
    col.pw[0] = well.bhp;
    for (std::size_t m = 1; m < n; ++m) {
        const double rho_avg = 0.5 * (rho[m - 1] + rho[m]);
        col.pw[m] = col.pw[m - 1] + rho_avg * gravity * (depth[m] - depth[m - 1]) / kPaPerBar;
    }
    return col;
}

struct State {
    std::vector<double> p;
    std::vector<double> sw;
};

}  // namespace

WellRateResult well_rates(std::span<const double> p_perf, std::span<const double> sw_perf,
                          std::span<const double> wi, std::span<const double> depth,
                          WellType type, double bhp, const FluidProps& fluids, double gravity) {
    if (p_perf.size() != sw_perf.size() || p_perf.size() != wi.size() ||
        p_perf.size() != depth.size()) {
        throw std::invalid_argument("well_rates: perforation arrays must have equal length");
    }
    DiscreteModel::Well well;
    well.type = type;
    well.bhp = bhp;
    const auto col = wellbore_pressures(well, p_perf, sw_perf, depth, fluids, gravity);

    WellRateResult out;
    out.wellbore_pressure = col.pw;
    for (std::size_t m = 0; m < p_perf.size(); ++m) {
        const double p = p_perf[m];
        const double sw = sw_perf[m];
        const double mu_o = fluids.mu_o(p);
        if (type == WellType::injector) {
            const double lt = fluids.relperm.krw(sw) / fluids.mu_w + fluids.relperm.kro(sw) / mu_o;
            double dp = col.pw[m] - p;
            if (dp < 0.0) {
                dp = 0.0;
                out.clamped = true;
            }
            // injected water reported at reference density
            out.water += kDarcy * wi[m] * lt * (fluids.rho_w(p) / fluids.rho_w_ref) * dp;
        } else {
            double dp = p - col.pw[m];
            if (dp < 0.0) {
                dp = 0.0;
                out.clamped = true;
            }
            out.water += kDarcy * wi[m] * (fluids.relperm.krw(sw) / fluids.mu_w) *
                         (fluids.rho_w(p) / fluids.rho_w_ref) * dp;
            out.oil += kDarcy * wi[m] * (fluids.relperm.kro(sw) / mu_o) *
                       (fluids.rho_o(p) / fluids.rho_o_ref) * dp;
        }
    }
    return out;
}

namespace {

class TwoPhaseAssembler {
public:
    TwoPhaseAssembler(const DiscreteModel& model, const FluidProps& fluids, double gravity,
                      double tol)
        : model_(model), fluids_(fluids), gravity_(gravity), tol_(tol) {
        const Grid& g = model.grid;
        depth_.resize(static_cast<std::size_t>(g.ncells()));
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    depth_[static_cast<std::size_t>(g.cell(i, j, k))] = g.depth(k);
    }

    const std::vector<double>& depth() const { return depth_; }

    // Assembles residual and Jacobian for one implicit step. Returns the max
    // scaled residual. Wellbore pressure columns are refreshed from `state`
    // and held fixed within the linearization.
    double assemble(const State& state, const State& prev, double dt,
                    std::vector<Eigen::Triplet<double>>& trip, Eigen::VectorXd& residual,
                    bool* any_producer_clamp) {
        const Grid& g = model_.grid;
        const int n = g.ncells();
        trip.clear();
        residual.setZero();
        if (any_producer_clamp) *any_producer_clamp = false;

        // accumulation
        for (int c = 0; c < n; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            const double vp = model_.pore_volume(c) / dt;
            const double bw = 1.0 + fluids_.c_w * (state.p[cu] - fluids_.p_ref);
            const double bo = 1.0 + fluids_.c_o * (state.p[cu] - fluids_.p_ref);
            const double bw_n = 1.0 + fluids_.c_w * (prev.p[cu] - fluids_.p_ref);
            const double bo_n = 1.0 + fluids_.c_o * (prev.p[cu] - fluids_.p_ref);
            residual(2 * c) += vp * (bw * state.sw[cu] - bw_n * prev.sw[cu]);
            residual(2 * c + 1) += vp * (bo * (1.0 - state.sw[cu]) - bo_n * (1.0 - prev.sw[cu]));
            trip.emplace_back(2 * c, 2 * c, vp * fluids_.c_w * state.sw[cu]);
            trip.emplace_back(2 * c, 2 * c + 1, vp * bw);
            trip.emplace_back(2 * c + 1, 2 * c, vp * fluids_.c_o * (1.0 - state.sw[cu]));
            trip.emplace_back(2 * c + 1, 2 * c + 1, -vp * bo);
        }

        // interior faces
        const Grid& gr = g;
        for (int k = 0; k < gr.nz; ++k)
            for (int j = 0; j < gr.ny; ++j)
                for (int i = 0; i + 1 < gr.nx; ++i)
                    add_face(state, trip, residual, gr.cell(i, j, k), gr.cell(i + 1, j, k),
                             model_.tx[static_cast<std::size_t>(model_.fx(i, j, k))]);
        for (int k = 0; k < gr.nz; ++k)
            for (int j = 0; j + 1 < gr.ny; ++j)
                for (int i = 0; i < gr.nx; ++i)
                    add_face(state, trip, residual, gr.cell(i, j, k), gr.cell(i, j + 1, k),
                             model_.ty[static_cast<std::size_t>(model_.fy(i, j, k))]);
        for (int k = 0; k + 1 < gr.nz; ++k)
            for (int j = 0; j < gr.ny; ++j)
                for (int i = 0; i < gr.nx; ++i)
                    add_face(state, trip, residual, gr.cell(i, j, k), gr.cell(i, j, k + 1),
                             model_.tz[static_cast<std::size_t>(model_.fz(i, j, k))]);

        // wells
        for (const auto& w : model_.wells) add_well(state, trip, residual, w, any_producer_clamp);

        // scaled max-norm of the mass residual
        double worst = 0.0;
        for (int c = 0; c < n; ++c) {
            const double scale = model_.pore_volume(c) / dt;
            worst = std::max(worst, std::abs(residual(2 * c)) / scale);
            worst = std::max(worst, std::abs(residual(2 * c + 1)) / scale);
        }
        return worst;
    }

    double tol() const { return tol_; }

private:
    void add_face(const State& state, std::vector<Eigen::Triplet<double>>& trip,
                  Eigen::VectorXd& residual, int ca, int cb, double t) {
        if (t <= 0.0) return;
        const auto a = static_cast<std::size_t>(ca);
        const auto b = static_cast<std::size_t>(cb);
        const double coeff = kDarcy * t;
        const double dz = depth_[a] - depth_[b];

        for (int phase = 0; phase < 2; ++phase) {
            const bool water = phase == 0;
            const double c_j = water ? fluids_.c_w : fluids_.c_o;
            const double rho_a = water ? fluids_.rho_w(state.p[a]) : fluids_.rho_o(state.p[a]);
            const double rho_b = water ? fluids_.rho_w(state.p[b]) : fluids_.rho_o(state.p[b]);
            const double drho_dp = water ? fluids_.drho_w_dp() : fluids_.drho_o_dp();
            const double grav = gravity_ * dz / kPaPerBar;
            const double pot = state.p[a] - state.p[b] - 0.5 * (rho_a + rho_b) * grav;
            const double dpot_dpa = 1.0 - 0.5 * drho_dp * grav;
            const double dpot_dpb = -1.0 - 0.5 * drho_dp * grav;

            const int up = pot >= 0.0 ? ca : cb;
            const auto u = static_cast<std::size_t>(up);
            const double sw_u = state.sw[u];
            const double p_u = state.p[u];
            double lambda, dlam_dsw, dlam_dp;
            if (water) {
                lambda = fluids_.relperm.krw(sw_u) / fluids_.mu_w;
                dlam_dsw = fluids_.relperm.dkrw_dsw(sw_u) / fluids_.mu_w;
                dlam_dp = 0.0;
            } else {
                const double mu = fluids_.mu_o(p_u);
                lambda = fluids_.relperm.kro(sw_u) / mu;
                dlam_dsw = fluids_.relperm.dkro_dsw(sw_u) / mu;
                dlam_dp = -fluids_.relperm.kro(sw_u) * fluids_.dmu_o_dp(p_u) / (mu * mu);
            }
            const double b_u = 1.0 + c_j * (p_u - fluids_.p_ref);
            const double flux = coeff * lambda * b_u * pot;
            const int row_a = 2 * ca + phase;
            const int row_b = 2 * cb + phase;
            residual(row_a) += flux;
            residual(row_b) -= flux;

            // potential-difference part
            const double f_dpa = coeff * lambda * b_u * dpot_dpa;
            const double f_dpb = coeff * lambda * b_u * dpot_dpb;
            // upstream coefficient part
            const double f_dsu = coeff * dlam_dsw * b_u * pot;
            const double f_dpu = coeff * (dlam_dp * b_u + lambda * c_j) * pot;

            trip.emplace_back(row_a, 2 * ca, f_dpa + (up == ca ? f_dpu : 0.0));
            trip.emplace_back(row_a, 2 * cb, f_dpb + (up == cb ? f_dpu : 0.0));
            trip.emplace_back(row_a, 2 * up + 1, f_dsu);
            trip.emplace_back(row_b, 2 * ca, -(f_dpa + (up == ca ? f_dpu : 0.0)));
            trip.emplace_back(row_b, 2 * cb, -(f_dpb + (up == cb ? f_dpu : 0.0)));
            trip.emplace_back(row_b, 2 * up + 1, -f_dsu);
        }
    }

    void add_well(const State& state, std::vector<Eigen::Triplet<double>>& trip,
                  Eigen::VectorXd& residual, const DiscreteModel::Well& well,
                  bool* any_producer_clamp) {
        const std::size_t np = well.perfs.size();
        std::vector<double> p_perf(np), sw_perf(np), d_perf(np);
        for (std::size_t m = 0; m < np; ++m) {
            const auto c = static_cast<std::size_t>(well.perfs[m].cell);
            p_perf[m] = state.p[c];
            sw_perf[m] = state.sw[c];
            d_perf[m] = depth_[c];
        }
        const auto col = wellbore_pressures(well, p_perf, sw_perf, d_perf, fluids_, gravity_);

        for (std::size_t m = 0; m < np; ++m) {
            const int cell = well.perfs[m].cell;
            const auto cu = static_cast<std::size_t>(cell);
            const double wi = kDarcy * well.perfs[m].wi;
            const double p = state.p[cu];
            const double sw = state.sw[cu];
            const double mu_o = fluids_.mu_o(p);
            const double dmu = fluids_.dmu_o_dp(p);
            const double bw = 1.0 + fluids_.c_w * (p - fluids_.p_ref);
            const double bo = 1.0 + fluids_.c_o * (p - fluids_.p_ref);

            if (well.type == WellType::injector) {
                const double dp = col.pw[m] - p;
                if (dp <= 0.0) continue;  // no backflow into the well
                const double krw = fluids_.relperm.krw(sw);
                const double kro = fluids_.relperm.kro(sw);
                const double lt = krw / fluids_.mu_w + kro / mu_o;
                const double dlt_dsw =
                    fluids_.relperm.dkrw_dsw(sw) / fluids_.mu_w + fluids_.relperm.dkro_dsw(sw) / mu_o;
                const double dlt_dp = -kro * dmu / (mu_o * mu_o);
                const int row = 2 * cell;
                residual(row) -= wi * lt * bw * dp;
                trip.emplace_back(row, 2 * cell,
                                  -wi * ((dlt_dp * bw + lt * fluids_.c_w) * dp - lt * bw));
                trip.emplace_back(row, 2 * cell + 1, -wi * dlt_dsw * bw * dp);
            } else {
                const double dp = p - col.pw[m];
                if (dp <= 0.0) {
                    if (dp < 0.0 && any_producer_clamp) *any_producer_clamp = true;
                    continue;
                }
                // water
                {
                    const double lam = fluids_.relperm.krw(sw) / fluids_.mu_w;
                    const double dlam_dsw = fluids_.relperm.dkrw_dsw(sw) / fluids_.mu_w;
                    const int row = 2 * cell;
                    residual(row) += wi * lam * bw * dp;
                    trip.emplace_back(row, 2 * cell,
                                      wi * (lam * fluids_.c_w * dp + lam * bw));
                    trip.emplace_back(row, 2 * cell + 1, wi * dlam_dsw * bw * dp);
                }
                // oil
                {
                    const double kro = fluids_.relperm.kro(sw);
                    const double lam = kro / mu_o;
                    const double dlam_dsw = fluids_.relperm.dkro_dsw(sw) / mu_o;
                    const double dlam_dp = -kro * dmu / (mu_o * mu_o);
                    const int row = 2 * cell + 1;
                    residual(row) += wi * lam * bo * dp;
                    trip.emplace_back(row, 2 * cell,
                                      wi * ((dlam_dp * bo + lam * fluids_.c_o) * dp + lam * bo));
                    trip.emplace_back(row, 2 * cell + 1, wi * dlam_dsw * bo * dp);
                }
            }
        }
    }

    const DiscreteModel& model_;
    const FluidProps& fluids_;
    double gravity_;
    double tol_;
    std::vector<double> depth_;
};

bool newton_solve(TwoPhaseAssembler& assembler, const State& prev, State& state, double dt,
                  int max_iters, int* iters_used, double* final_residual,
                  bool* producer_clamped) {
    const int n = static_cast<int>(state.p.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd residual(2 * n);
    Eigen::SparseMatrix<double> jac(2 * n, 2 * n);

    for (int it = 0; it < max_iters; ++it) {
        const double worst = assembler.assemble(state, prev, dt, trip, residual, producer_clamped);
        if (worst <= assembler.tol()) {
            *iters_used = it;
            *final_residual = worst;
            return true;
        }
        jac.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) return false;
        Eigen::VectorXd dx = lu.solve(-residual);
        if (!dx.allFinite()) return false;

        for (int c = 0; c < n; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            state.p[cu] += dx(2 * c);
            double ds = dx(2 * c + 1);
            ds = std::clamp(ds, -0.2, 0.2);  // saturation chop
            state.sw[cu] = std::clamp(state.sw[cu] + ds, 0.0, 1.0);
        }
    }
    // accept if the last update landed within tolerance
    const double worst = assembler.assemble(state, prev, dt, trip, residual, producer_clamped);
    if (worst <= assembler.tol()) {
        *iters_used = max_iters;
        *final_residual = worst;
        return true;
    }
    return false;
}

}  // namespace

SimResult simulate(const DiscreteModel& model, const FluidProps& fluids, const Schedule& schedule) {
    model.validate();
    fluids.validate();
    schedule.validate();
    for (const auto& w : model.wells) {
        if (w.perfs.empty()) throw std::invalid_argument("well without perforations: " + w.name);
    }

    const Grid& g = model.grid;
    const int n = g.ncells();
    TwoPhaseAssembler assembler(model, fluids, schedule.gravity, schedule.newton_tol);

    // hydrostatic initialization referenced to the top-layer cell centers
    State state;
    state.p.resize(static_cast<std::size_t>(n));
    state.sw.assign(static_cast<std::size_t>(n), schedule.init_sw);
    const double rho_mix = schedule.init_sw * fluids.rho_w(schedule.init_pressure) +
                           (1.0 - schedule.init_sw) * fluids.rho_o(schedule.init_pressure);
    const double z_ref = g.depth(0);
    for (int c = 0; c < n; ++c) {
        const double z = assembler.depth()[static_cast<std::size_t>(c)];
        state.p[static_cast<std::size_t>(c)] =
            schedule.init_pressure + rho_mix * schedule.gravity * (z - z_ref) / kPaPerBar;
    }

    SimResult result;
    result.grid = g;
    result.snapshot_days = schedule.snapshots;
    for (const auto& w : model.wells) {
        result.well_names.push_back(w.name);
        result.well_types.push_back(w.type);
        result.rates.push_back({});
    }

    auto record_snapshot = [&](const State& s) {
        result.pressure.push_back(s.p);
        result.saturation.push_back(s.sw);
        for (std::size_t wi = 0; wi < model.wells.size(); ++wi) {
            const auto& w = model.wells[wi];
            const std::size_t np = w.perfs.size();
            std::vector<double> pp(np), sp(np), wv(np), dp(np);
            for (std::size_t m = 0; m < np; ++m) {
                const auto c = static_cast<std::size_t>(w.perfs[m].cell);
                pp[m] = s.p[c];
                sp[m] = s.sw[c];
                wv[m] = w.perfs[m].wi;
                dp[m] = assembler.depth()[c];
            }
            const auto r =
                well_rates(pp, sp, wv, dp, w.type, w.bhp, fluids, schedule.gravity);
            result.rates[wi][0].push_back(r.water);
            result.rates[wi][1].push_back(r.oil);
        }
    };

    double t = 0.0;
    double dt_ctrl = schedule.dt_init;
    std::size_t next_snap = 0;
    while (next_snap < schedule.snapshots.size()) {
        const double target = schedule.snapshots[next_snap];
        double dt = std::min({dt_ctrl, schedule.dt_max, target - t});

        State trial = state;
        int iters = 0;
        double res = 0.0;
        bool clamp = false;
        while (!newton_solve(assembler, state, trial, dt, schedule.max_newton, &iters, &res,
                             &clamp)) {
            dt *= 0.5;
            if (dt < schedule.dt_min) {
                throw std::runtime_error(
                    "newton failed at t=" + std::to_string(t) + " days with dt=" +
                    std::to_string(dt * 2.0) + " days after step halving to the floor");
            }
            trial = state;
        }
        state = std::move(trial);
        t += dt;
        result.steps.push_back({t - dt, dt, iters, res});
        result.n_newton += iters;
        if (clamp) ++result.producer_clamp_events;
        dt_ctrl = std::min(dt * schedule.dt_growth, schedule.dt_max);
        if (std::abs(t - target) < 1e-9) {
            record_snapshot(state);
            ++next_snap;
        }
    }
    result.n_steps = static_cast<int>(result.steps.size());
    return result;
}

SimResult simulate(const FineGeomodel& model, const FluidProps& fluids,
                   const std::vector<WellSpec>& wells, const Schedule& schedule) {
    return simulate(discretize(model, wells), fluids, schedule);
}

SimResult simulate(const CoarseModel& model, const FluidProps& fluids,
                   const std::vector<WellSpec>& wells, const Schedule& schedule) {
    return simulate(discretize(model, wells), fluids, schedule);
}

void save_sim_result(const SimResult& result, const std::string& path) {
    nlohmann::json wells = nlohmann::json::array();
    for (std::size_t w = 0; w < result.well_names.size(); ++w) {
        wells.push_back({{"name", result.well_names[w]},
                         {"type", result.well_types[w] == WellType::injector ? "injector"
                                                                             : "producer"}});
    }
    nlohmann::json header{
        {"format", "mfres.simresult.v1"},
        {"nx", result.grid.nx}, {"ny", result.grid.ny}, {"nz", result.grid.nz},
        {"dx", result.grid.dx}, {"dy", result.grid.dy}, {"dz", result.grid.dz},
        {"datum_depth", result.grid.datum_depth},
        {"snapshot_days", result.snapshot_days},
        {"wells", wells},
        {"n_steps", result.n_steps},
        {"n_newton", result.n_newton},
        {"producer_clamp_events", result.producer_clamp_events},
    };
    BlobWriter writer(std::move(header));
    std::vector<double> flat;
    flat.reserve(result.pressure.size() * static_cast<std::size_t>(result.grid.ncells()));
    for (const auto& snap : result.pressure) flat.insert(flat.end(), snap.begin(), snap.end());
    writer.add_f64(flat);
    flat.clear();
    for (const auto& snap : result.saturation) flat.insert(flat.end(), snap.begin(), snap.end());
    writer.add_f64(flat);

    std::ostringstream csv;
    csv << "well,phase,day,rate\n";
    for (std::size_t w = 0; w < result.well_names.size(); ++w) {
        for (int phase = 0; phase < 2; ++phase) {
            for (std::size_t s = 0; s < result.snapshot_days.size(); ++s) {
                csv << result.well_names[w] << ',' << (phase == 0 ? "water" : "oil") << ','
                    << format_f64(result.snapshot_days[s]) << ','
                    << format_f64(result.rates[w][static_cast<std::size_t>(phase)][s]) << '\n';
            }
        }
    }
    writer.set_text(csv.str());
    writer.save(path);
}

SimResult load_sim_result(const std::string& path) {
    BlobReader reader(path);
    const auto& h = reader.header();
    if (h.value("format", "") != std::string("mfres.simresult.v1")) {
        throw std::runtime_error("not a sim result file: " + path);
    }
    SimResult result;
    result.grid.nx = h.at("nx");
    result.grid.ny = h.at("ny");
    result.grid.nz = h.at("nz");
    result.grid.dx = h.at("dx");
    result.grid.dy = h.at("dy");
    result.grid.dz = h.at("dz");
    result.grid.datum_depth = h.at("datum_depth");
    result.snapshot_days = h.at("snapshot_days").get<std::vector<double>>();
    result.n_steps = h.at("n_steps");
    result.n_newton = h.at("n_newton");
    result.producer_clamp_events = h.at("producer_clamp_events");
    for (const auto& w : h.at("wells")) {
        result.well_names.push_back(w.at("name"));
        result.well_types.push_back(w.at("type") == "injector" ? WellType::injector
                                                               : WellType::producer);
        result.rates.push_back({});
        result.rates.back()[0].resize(result.snapshot_days.size());
        result.rates.back()[1].resize(result.snapshot_days.size());
    }
    const auto nc = static_cast<std::size_t>(result.grid.ncells());
    const std::size_t ns = result.snapshot_days.size();
    auto p_flat = reader.read_f64(nc * ns);
    auto s_flat = reader.read_f64(nc * ns);
    for (std::size_t s = 0; s < ns; ++s) {
        result.pressure.emplace_back(p_flat.begin() + static_cast<std::ptrdiff_t>(s * nc),
                                     p_flat.begin() + static_cast<std::ptrdiff_t>((s + 1) * nc));
        result.saturation.emplace_back(s_flat.begin() + static_cast<std::ptrdiff_t>(s * nc),
                                       s_flat.begin() + static_cast<std::ptrdiff_t>((s + 1) * nc));
    }

    std::istringstream csv(reader.read_text());
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, phase, day, rate;
        std::getline(row, name, ',');
        std::getline(row, phase, ',');
        std::getline(row, day, ',');
        std::getline(row, rate, ',');
        const double d = std::stod(day);
        std::size_t si = 0;
        while (si < ns && std::abs(result.snapshot_days[si] - d) > 1e-9) ++si;
        if (si == ns) throw std::runtime_error("rate row day not in snapshot list");
        for (std::size_t w = 0; w < result.well_names.size(); ++w) {
            if (result.well_names[w] == name) {
                result.rates[w][phase == "water" ? 0 : 1][si] = std::stod(rate);
                break;
            }
        }
    }
    return result;
}

}  // namespace mfres
