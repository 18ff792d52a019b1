#include "mfres/upscaler.hpp"

#include "mfres/blobfile.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfres {

void CoarseModel::validate() const {
    grid.validate();
    if (rx < 1 || ry < 1 || rz < 1) throw std::invalid_argument("invalid coarsening ratios");
    const auto nc = static_cast<std::size_t>(grid.ncells());
    if (poro.size() != nc) throw std::invalid_argument("coarse porosity size mismatch");
    if (tx.size() != static_cast<std::size_t>((grid.nx - 1) * grid.ny * grid.nz) ||
        ty.size() != static_cast<std::size_t>(grid.nx * (grid.ny - 1) * grid.nz) ||
        tz.size() != static_cast<std::size_t>(grid.nx * grid.ny * (grid.nz - 1))) {
        throw std::invalid_argument("coarse transmissibility size mismatch");
    }
    for (const auto* t : {&tx, &ty, &tz}) {
        for (double v : *t) {
            if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("coarse T must be >= 0");
        }
    }
}

SinglePhaseSolution solve_single_phase(const DiscreteModel& model) {
    model.validate();
    if (model.wells.empty()) throw std::invalid_argument("single-phase solve needs wells");
    double bhp_min = model.wells.front().bhp, bhp_max = bhp_min;
    for (const auto& w : model.wells) {
        bhp_min = std::min(bhp_min, w.bhp);
        bhp_max = std::max(bhp_max, w.bhp);
    }
    if (bhp_max - bhp_min <= 0.0) {
        throw std::invalid_argument("single-phase solve singular: all well BHPs equal");
    }

    const Grid& g = model.grid;
    const int n = g.ncells();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 7);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);

    auto add_face = [&](int ca, int cb, double t) {
        if (t <= 0.0) return;
        diag[static_cast<std::size_t>(ca)] += t;
        diag[static_cast<std::size_t>(cb)] += t;
        trip.emplace_back(ca, cb, -t);
        trip.emplace_back(cb, ca, -t);
    };
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i)
                add_face(g.cell(i, j, k), g.cell(i + 1, j, k),
                         model.tx[static_cast<std::size_t>(model.fx(i, j, k))]);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                add_face(g.cell(i, j, k), g.cell(i, j + 1, k),
                         model.ty[static_cast<std::size_t>(model.fy(i, j, k))]);
    for (int k = 0; k + 1 < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                add_face(g.cell(i, j, k), g.cell(i, j, k + 1),
                         model.tz[static_cast<std::size_t>(model.fz(i, j, k))]);

    for (const auto& w : model.wells) {
        for (const auto& p : w.perfs) {
            diag[static_cast<std::size_t>(p.cell)] += p.wi;
            rhs(p.cell) += p.wi * w.bhp;
        }
    }
    for (int c = 0; c < n; ++c) trip.emplace_back(c, c, diag[static_cast<std::size_t>(c)]);

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("single-phase pressure system factorization failed");
    }
    Eigen::VectorXd p = solver.solve(rhs);

    SinglePhaseSolution sol;
    sol.pressure.assign(p.data(), p.data() + n);
    sol.flux_x.resize(model.tx.size());
    sol.flux_y.resize(model.ty.size());
    sol.flux_z.resize(model.tz.size());
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i) {
                const auto f = static_cast<std::size_t>(model.fx(i, j, k));
                sol.flux_x[f] = model.tx[f] * (p(g.cell(i, j, k)) - p(g.cell(i + 1, j, k)));
            }
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const auto f = static_cast<std::size_t>(model.fy(i, j, k));
                sol.flux_y[f] = model.ty[f] * (p(g.cell(i, j, k)) - p(g.cell(i, j + 1, k)));
            }
    for (int k = 0; k + 1 < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const auto f = static_cast<std::size_t>(model.fz(i, j, k));
                sol.flux_z[f] = model.tz[f] * (p(g.cell(i, j, k)) - p(g.cell(i, j, k + 1)));
            }
    for (const auto& w : model.wells) {
        SinglePhaseSolution::WellFlow wf;
        wf.name = w.name;
        wf.bhp = w.bhp;
        for (const auto& perf : w.perfs) {
            wf.cells.push_back(perf.cell);
            wf.flow.push_back(perf.wi * (p(perf.cell) - w.bhp));
        }
        sol.wells.push_back(std::move(wf));
    }
    return sol;
}

namespace {

struct Ratios {
    int rx, ry, rz;
};

void check_divisible(const Grid& g, const UpscaleOptions& opt) {
    if (g.nx % opt.rx != 0 || g.ny % opt.ry != 0 || g.nz % opt.rz != 0) {
        throw std::invalid_argument("fine dimensions not divisible by coarsening ratios");
    }
}

double bhp_spread(const SinglePhaseSolution& sol) {
    double lo = sol.wells.front().bhp, hi = lo;
    for (const auto& w : sol.wells) {
        lo = std::min(lo, w.bhp);
        hi = std::max(hi, w.bhp);
    }
    return hi - lo;
}

// Mean pressure over a coarse block (uniform fine cell volumes).
double block_mean_pressure(const Grid& g, const SinglePhaseSolution& sol, const Ratios& r,
                           int ci, int cj, int ck) {
    double sum = 0.0;
    for (int k = ck * r.rz; k < (ck + 1) * r.rz; ++k)
        for (int j = cj * r.ry; j < (cj + 1) * r.ry; ++j)
            for (int i = ci * r.rx; i < (ci + 1) * r.rx; ++i)
                sum += sol.pressure[static_cast<std::size_t>(g.cell(i, j, k))];
    return sum / (r.rx * r.ry * r.rz);
}

}  // namespace

double coarse_face_harmonic_t(const FineGeomodel& fine, const UpscaleOptions& opt, int axis,
                              int ci, int cj, int ck) {
    const Grid& g = fine.grid;
    const int r[3] = {opt.rx, opt.ry, opt.rz};
    const double d[3] = {g.dx, g.dy, g.dz};
    const int ra = r[axis];
    const double da = d[axis];
    const double face_area = (axis == 0) ? g.dy * g.dz : (axis == 1) ? g.dx * g.dz : g.dx * g.dy;

    // Span along the axis from the left-block center to the right-block
    // center, in fine-cell units.
    const int base[3] = {ci * opt.rx, cj * opt.ry, ck * opt.rz};
    const double span_lo = base[axis] + 0.5 * ra;
    const double span_hi = span_lo + ra;

    // Cross-section of the face in the two transverse directions.
    const int axes_t[2] = {axis == 0 ? 1 : 0, axis == 2 ? 1 : 2};
    double total = 0.0;
    for (int t1 = 0; t1 < r[axes_t[1]]; ++t1) {
        for (int t0 = 0; t0 < r[axes_t[0]]; ++t0) {
            double resistance = 0.0;
            const int first = static_cast<int>(std::floor(span_lo));
            const int last = static_cast<int>(std::ceil(span_hi)) - 1;
            for (int a = first; a <= last; ++a) {
                const double overlap = std::min<double>(a + 1, span_hi) - std::max<double>(a, span_lo);
                if (overlap <= 0.0) continue;
                int idx[3] = {base[0], base[1], base[2]};
                idx[axis] = a;
                idx[axes_t[0]] += t0;
                idx[axes_t[1]] += t1;
                const double perm = fine.perm(g.cell(idx[0], idx[1], idx[2]));
                resistance += overlap * da / (perm * face_area);
            }
            total += 1.0 / resistance;
        }
    }
    return total;
}

FaceTransmissibilities upscale_transmissibility(const FineGeomodel& fine,
                                                const SinglePhaseSolution& sol,
                                                const UpscaleOptions& opt) {
    check_divisible(fine.grid, opt);
    const Grid& g = fine.grid;
    const Ratios r{opt.rx, opt.ry, opt.rz};
    const int cnx = g.nx / r.rx, cny = g.ny / r.ry, cnz = g.nz / r.rz;
    const double dp_floor = opt.dp_floor_fraction * bhp_spread(sol);

    FaceTransmissibilities out;
    out.tx.assign(static_cast<std::size_t>((cnx - 1) * cny * cnz), 0.0);
    out.ty.assign(static_cast<std::size_t>(cnx * (cny - 1) * cnz), 0.0);
    out.tz.assign(static_cast<std::size_t>(cnx * cny * (cnz - 1)), 0.0);
    out.tx_anomaly.assign(out.tx.size(), 0);
    out.ty_anomaly.assign(out.ty.size(), 0);
    out.tz_anomaly.assign(out.tz.size(), 0);

    auto one_face = [&](int axis, int ci, int cj, int ck, double flux_sum, double dp,
                        double& t_out, std::uint8_t& flag) {
        const double t_harm = coarse_face_harmonic_t(fine, opt, axis, ci, cj, ck);
        if (std::abs(dp) < dp_floor) {
            t_out = t_harm;
            flag = 1;
            return;
        }
        const double t_star = flux_sum / dp;
        if (t_star < 0.0 || t_star > opt.t_cap_factor * t_harm) {
            t_out = t_harm;
            flag = 1;
            return;
        }
        t_out = t_star;
        flag = 0;
    };

    for (int ck = 0; ck < cnz; ++ck)
        for (int cj = 0; cj < cny; ++cj)
            for (int ci = 0; ci + 1 < cnx; ++ci) {
                double flux_sum = 0.0;
                const int fi = (ci + 1) * r.rx - 1;  // fine face between fi and fi+1
                for (int k = ck * r.rz; k < (ck + 1) * r.rz; ++k)
                    for (int j = cj * r.ry; j < (cj + 1) * r.ry; ++j)
                        flux_sum += sol.flux_x[static_cast<std::size_t>(
                            fi + (g.nx - 1) * (j + g.ny * k))];
                const double dp = block_mean_pressure(g, sol, r, ci, cj, ck) -
                                  block_mean_pressure(g, sol, r, ci + 1, cj, ck);
                const auto f = static_cast<std::size_t>(ci + (cnx - 1) * (cj + cny * ck));
                one_face(0, ci, cj, ck, flux_sum, dp, out.tx[f], out.tx_anomaly[f]);
            }
    for (int ck = 0; ck < cnz; ++ck)
        for (int cj = 0; cj + 1 < cny; ++cj)
            for (int ci = 0; ci < cnx; ++ci) {
                double flux_sum = 0.0;
                const int fj = (cj + 1) * r.ry - 1;
                for (int k = ck * r.rz; k < (ck + 1) * r.rz; ++k)
                    for (int i = ci * r.rx; i < (ci + 1) * r.rx; ++i)
                        flux_sum += sol.flux_y[static_cast<std::size_t>(
                            i + g.nx * (fj + (g.ny - 1) * k))];
                const double dp = block_mean_pressure(g, sol, r, ci, cj, ck) -
                                  block_mean_pressure(g, sol, r, ci, cj + 1, ck);
                const auto f = static_cast<std::size_t>(ci + cnx * (cj + (cny - 1) * ck));
                one_face(1, ci, cj, ck, flux_sum, dp, out.ty[f], out.ty_anomaly[f]);
            }
    for (int ck = 0; ck + 1 < cnz; ++ck)
        for (int cj = 0; cj < cny; ++cj)
            for (int ci = 0; ci < cnx; ++ci) {
                double flux_sum = 0.0;
                const int fk = (ck + 1) * r.rz - 1;
                for (int j = cj * r.ry; j < (cj + 1) * r.ry; ++j)
                    for (int i = ci * r.rx; i < (ci + 1) * r.rx; ++i)
                        flux_sum += sol.flux_z[static_cast<std::size_t>(
                            i + g.nx * (j + g.ny * fk))];
                const double dp = block_mean_pressure(g, sol, r, ci, cj, ck) -
                                  block_mean_pressure(g, sol, r, ci, cj, ck + 1);
                const auto f = static_cast<std::size_t>(ci + cnx * (cj + cny * ck));
                one_face(2, ci, cj, ck, flux_sum, dp, out.tz[f], out.tz_anomaly[f]);
            }
    return out;
}

std::vector<CoarseWellEntry> upscale_well_index(const FineGeomodel& fine,
                                                const SinglePhaseSolution& sol,
                                                const std::vector<WellSpec>& wells,
                                                const UpscaleOptions& opt) {
    check_divisible(fine.grid, opt);
    const Grid& g = fine.grid;
    const Ratios r{opt.rx, opt.ry, opt.rz};
    const double dp_floor = opt.dp_floor_fraction * bhp_spread(sol);

    std::vector<CoarseWellEntry> out;
    for (const auto& w : wells) {
        const SinglePhaseSolution::WellFlow* wf = nullptr;
        for (const auto& cand : sol.wells) {
            if (cand.name == w.name) {
                wf = &cand;
                break;
            }
        }
        if (!wf) throw std::invalid_argument("well missing from single-phase solution: " + w.name);

        CoarseWellEntry entry;
        entry.name = w.name;
        entry.i = w.i / r.rx;
        entry.j = w.j / r.ry;
        const int ck_top = w.k_top / r.rz;
        const int ck_bottom = w.k_bottom / r.rz;
        for (int ck = ck_top; ck <= ck_bottom; ++ck) {
            double flow_sum = 0.0;
            double fine_wi_sum = 0.0;
            bool any = false;
            for (std::size_t p = 0; p < wf->cells.size(); ++p) {
                const int cell = wf->cells[p];
                const int k = cell / (g.nx * g.ny);
                if (k / r.rz != ck) continue;
                any = true;
                flow_sum += wf->flow[p];
            }
            if (!any) continue;
            for (int k = std::max(w.k_top, ck * r.rz); k <= std::min(w.k_bottom, (ck + 1) * r.rz - 1);
                 ++k) {
                fine_wi_sum += well_index(fine.perm(g.cell(w.i, w.j, k)), g.dz, g.dx, w.r_w);
            }
            const double mean_p = block_mean_pressure(g, sol, r, entry.i, entry.j, ck);
            const double denom = mean_p - w.bhp;
            double wi_star;
            std::uint8_t flag;
            if (std::abs(denom) < dp_floor) {
                wi_star = fine_wi_sum;
                flag = 1;
            } else {
                wi_star = flow_sum / denom;
                if (wi_star < 0.0) {
                    wi_star = fine_wi_sum;
                    flag = 1;
                } else {
                    flag = 0;
                }
            }
            entry.layers.push_back(ck);
            entry.wi.push_back(wi_star);
            entry.anomaly.push_back(flag);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

CoarseModel upscale(const FineGeomodel& fine, const std::vector<WellSpec>& wells,
                    const UpscaleOptions& opt) {
    check_divisible(fine.grid, opt);
    const DiscreteModel dm = discretize(fine, wells);
    const SinglePhaseSolution sol = solve_single_phase(dm);

    const Grid& g = fine.grid;
    CoarseModel coarse;
    coarse.rx = opt.rx;
    coarse.ry = opt.ry;
    coarse.rz = opt.rz;
    coarse.grid.nx = g.nx / opt.rx;
    coarse.grid.ny = g.ny / opt.ry;
    coarse.grid.nz = g.nz / opt.rz;
    coarse.grid.dx = g.dx * opt.rx;
    coarse.grid.dy = g.dy * opt.ry;
    coarse.grid.dz = g.dz * opt.rz;
    coarse.grid.datum_depth = g.datum_depth;

    coarse.poro.assign(static_cast<std::size_t>(coarse.grid.ncells()), 0.0);
    for (int ck = 0; ck < coarse.grid.nz; ++ck)
        for (int cj = 0; cj < coarse.grid.ny; ++cj)
            for (int ci = 0; ci < coarse.grid.nx; ++ci) {
                double sum = 0.0;
                for (int k = ck * opt.rz; k < (ck + 1) * opt.rz; ++k)
                    for (int j = cj * opt.ry; j < (cj + 1) * opt.ry; ++j)
                        for (int i = ci * opt.rx; i < (ci + 1) * opt.rx; ++i)
                            sum += fine.poro(g.cell(i, j, k));
                coarse.poro[static_cast<std::size_t>(coarse.grid.cell(ci, cj, ck))] =
                    sum / (opt.rx * opt.ry * opt.rz);
            }

    auto faces = upscale_transmissibility(fine, sol, opt);
    coarse.tx = std::move(faces.tx);
    coarse.ty = std::move(faces.ty);
    coarse.tz = std::move(faces.tz);
    coarse.tx_anomaly = std::move(faces.tx_anomaly);
    coarse.ty_anomaly = std::move(faces.ty_anomaly);
    coarse.tz_anomaly = std::move(faces.tz_anomaly);
    coarse.wells = upscale_well_index(fine, sol, wells, opt);
    coarse.validate();
    return coarse;
}

void save_coarse_model(const CoarseModel& model, const std::string& path) {
    model.validate();
    nlohmann::json wells = nlohmann::json::array();
    for (const auto& w : model.wells) {
        wells.push_back({{"name", w.name}, {"i", w.i}, {"j", w.j}, {"n_layers", w.layers.size()}});
    }
    nlohmann::json header{
        {"format", "mfres.coarse.v1"},
        {"nx", model.grid.nx}, {"ny", model.grid.ny}, {"nz", model.grid.nz},
        {"dx", model.grid.dx}, {"dy", model.grid.dy}, {"dz", model.grid.dz},
        {"datum_depth", model.grid.datum_depth},
        {"rx", model.rx}, {"ry", model.ry}, {"rz", model.rz},
        {"wells", wells},
    };
    BlobWriter writer(std::move(header));
    writer.add_f64(model.poro);
    writer.add_f64(model.tx);
    writer.add_f64(model.ty);
    writer.add_f64(model.tz);
    writer.add_u8(model.tx_anomaly);
    writer.add_u8(model.ty_anomaly);
    writer.add_u8(model.tz_anomaly);

    std::ostringstream csv;
    csv << "well,coarse_layer,wi,anomaly\n";
    for (const auto& w : model.wells) {
        for (std::size_t p = 0; p < w.layers.size(); ++p) {
            csv << w.name << ',' << w.layers[p] << ',' << format_f64(w.wi[p]) << ','
                << static_cast<int>(w.anomaly[p]) << '\n';
        }
    }
    writer.set_text(csv.str());
    writer.save(path);
}

CoarseModel load_coarse_model(const std::string& path) {
    BlobReader reader(path);
    const auto& h = reader.header();
    if (h.value("format", "") != std::string("mfres.coarse.v1")) {
        throw std::runtime_error("not a coarse model file: " + path);
    }
    CoarseModel model;
    model.grid.nx = h.at("nx");
    model.grid.ny = h.at("ny");
    model.grid.nz = h.at("nz");
    model.grid.dx = h.at("dx");
    model.grid.dy = h.at("dy");
    model.grid.dz = h.at("dz");
    model.grid.datum_depth = h.at("datum_depth");
    model.rx = h.at("rx");
    model.ry = h.at("ry");
    model.rz = h.at("rz");
    const Grid& g = model.grid;
    model.poro = reader.read_f64(static_cast<std::size_t>(g.ncells()));
    model.tx = reader.read_f64(static_cast<std::size_t>((g.nx - 1) * g.ny * g.nz));
    model.ty = reader.read_f64(static_cast<std::size_t>(g.nx * (g.ny - 1) * g.nz));
    model.tz = reader.read_f64(static_cast<std::size_t>(g.nx * g.ny * (g.nz - 1)));
    model.tx_anomaly = reader.read_u8(model.tx.size());
    model.ty_anomaly = reader.read_u8(model.ty.size());
    model.tz_anomaly = reader.read_u8(model.tz.size());

    for (const auto& w : h.at("wells")) {
        CoarseWellEntry entry;
        entry.name = w.at("name");
        entry.i = w.at("i");
        entry.j = w.at("j");
        model.wells.push_back(std::move(entry));
    }
    std::istringstream csv(reader.read_text());
    std::string line;
    std::getline(csv, line);  // header row
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, layer, wi, flag;
        std::getline(row, name, ',');
        std::getline(row, layer, ',');
        std::getline(row, wi, ',');
        std::getline(row, flag, ',');
        for (auto& w : model.wells) {
            if (w.name == name) {
                w.layers.push_back(std::stoi(layer));
                w.wi.push_back(std::stod(wi));
                w.anomaly.push_back(static_cast<std::uint8_t>(std::stoi(flag)));
                break;
            }
        }
    }
    model.validate();
    return model;
}

}  // namespace mfres
