#include "mfres/discrete.hpp"

#include "mfres/fluids.hpp"
#include "mfres/upscaler.hpp"

#include <cmath>
#include <stdexcept>

namespace mfres {

double well_index(double perm_md, double dz_m, double dx_m, double r_w_m) {
    const double r0 = 0.2 * dx_m;
    if (r_w_m <= 0.0) throw std::invalid_argument("wellbore radius must be positive");
    if (r_w_m >= r0) throw std::invalid_argument("wellbore radius must be below 0.2*dx");
    return 2.0 * M_PI * perm_md * dz_m / std::log(r0 / r_w_m);
}

void DiscreteModel::validate() const {
    grid.validate();
    const auto nc = static_cast<std::size_t>(grid.ncells());
    if (poro.size() != nc) throw std::invalid_argument("porosity size mismatch");
    if (tx.size() != static_cast<std::size_t>((grid.nx - 1) * grid.ny * grid.nz) ||
        ty.size() != static_cast<std::size_t>(grid.nx * (grid.ny - 1) * grid.nz) ||
        tz.size() != static_cast<std::size_t>(grid.nx * grid.ny * (grid.nz - 1))) {
        throw std::invalid_argument("transmissibility array size mismatch");
    }
    for (const auto& w : wells) {
        for (const auto& p : w.perfs) {
            if (p.cell < 0 || p.cell >= grid.ncells()) {
                throw std::invalid_argument("well perforation outside grid: " + w.name);
            }
            if (p.wi < 0.0) throw std::invalid_argument("negative well index: " + w.name);
        }
    }
}

namespace {

void check_well_column(const Grid& g, const WellSpec& w) {
    if (w.i < 0 || w.i >= g.nx || w.j < 0 || w.j >= g.ny) {
        throw std::invalid_argument("well column outside grid: " + w.name);
    }
    if (w.k_top < 0 || w.k_bottom >= g.nz || w.k_top > w.k_bottom) {
        throw std::invalid_argument("invalid perforated layer range: " + w.name);
    }
}

}  // namespace

DiscreteModel discretize(const FineGeomodel& model, const std::vector<WellSpec>& wells) {
    model.validate();
    const Grid& g = model.grid;
    DiscreteModel d;
    d.grid = g;
    d.poro.resize(static_cast<std::size_t>(g.ncells()));
    for (int c = 0; c < g.ncells(); ++c) d.poro[static_cast<std::size_t>(c)] = model.poro(c);

    d.tx.assign(static_cast<std::size_t>((g.nx - 1) * g.ny * g.nz), 0.0);
    d.ty.assign(static_cast<std::size_t>(g.nx * (g.ny - 1) * g.nz), 0.0);
    d.tz.assign(static_cast<std::size_t>(g.nx * g.ny * (g.nz - 1)), 0.0);

    auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
    for (int k = 0; k < g.nz; ++k) {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i + 1 < g.nx; ++i) {
                const double kh = harmonic(model.perm(g.cell(i, j, k)), model.perm(g.cell(i + 1, j, k)));
                d.tx[static_cast<std::size_t>(d.fx(i, j, k))] = kh * g.dy * g.dz / g.dx;
            }
        }
    }
    for (int k = 0; k < g.nz; ++k) {
        for (int j = 0; j + 1 < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double kh = harmonic(model.perm(g.cell(i, j, k)), model.perm(g.cell(i, j + 1, k)));
                d.ty[static_cast<std::size_t>(d.fy(i, j, k))] = kh * g.dx * g.dz / g.dy;
            }
        }
    }
    for (int k = 0; k + 1 < g.nz; ++k) {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double kh = harmonic(model.perm(g.cell(i, j, k)), model.perm(g.cell(i, j, k + 1)));
                d.tz[static_cast<std::size_t>(d.fz(i, j, k))] = kh * g.dx * g.dy / g.dz;
            }
        }
    }

    for (const auto& w : wells) {
        check_well_column(g, w);
        DiscreteModel::Well dw;
        dw.name = w.name;
        dw.type = w.type;
        dw.bhp = w.bhp;
        for (int k = w.k_top; k <= w.k_bottom; ++k) {
            const int c = g.cell(w.i, w.j, k);
            dw.perfs.push_back({c, well_index(model.perm(c), g.dz, g.dx, w.r_w)});
        }
        d.wells.push_back(std::move(dw));
    }
    d.validate();
    return d;
}

DiscreteModel discretize(const CoarseModel& model, const std::vector<WellSpec>& wells) {
    model.validate();
    DiscreteModel d;
    d.grid = model.grid;
    d.poro = model.poro;
    d.tx = model.tx;
    d.ty = model.ty;
    d.tz = model.tz;
    for (const auto& w : wells) {
        const CoarseWellEntry* entry = nullptr;
        for (const auto& e : model.wells) {
            if (e.name == w.name) {
                entry = &e;
                break;
            }
        }
        if (!entry) throw std::invalid_argument("well not present in coarse model: " + w.name);
        DiscreteModel::Well dw;
        dw.name = w.name;
        dw.type = w.type;
        dw.bhp = w.bhp;
        for (std::size_t p = 0; p < entry->layers.size(); ++p) {
            const int c = model.grid.cell(entry->i, entry->j, entry->layers[p]);
            dw.perfs.push_back({c, entry->wi[p]});
        }
        d.wells.push_back(std::move(dw));
    }
    d.validate();
    return d;
}

}  // namespace mfres
