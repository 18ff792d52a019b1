#include "mfres/geomodel.hpp"

#include "mfres/blobfile.hpp"
#include "mfres/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfres {

void Grid::validate() const {
    if (nx <= 0 || ny <= 0 || nz <= 0) throw std::invalid_argument("grid cell counts must be positive");
    if (dx <= 0.0 || dy <= 0.0 || dz <= 0.0) throw std::invalid_argument("grid cell sizes must be positive");
}

void RockMap::validate() const {
    if (sand_poro <= 0.0 || mud_poro <= 0.0 || sand_perm <= 0.0 || mud_perm <= 0.0) {
        throw std::invalid_argument("rock map requires strictly positive porosity and permeability");
    }
}

void FineGeomodel::validate() const {
    grid.validate();
    rock.validate();
    if (static_cast<int>(facies.size()) != grid.ncells()) {
        throw std::invalid_argument("facies array size does not match grid");
    }
    for (auto f : facies) {
        if (f > 1) throw std::invalid_argument("facies values must be 0 or 1");
    }
}

void ChannelPrior::validate() const {
    grid.validate();
    rock.validate();
    if (n_channels_min < 0 || n_channels_max < n_channels_min) {
        throw std::invalid_argument("invalid channel count range");
    }
    for (const auto* r : {&width, &amplitude, &wavelength, &orientation, &thickness}) {
        if (!r->valid()) throw std::invalid_argument("invalid distribution range in channel prior");
    }
    if (width.lo < 0.0 || wavelength.lo <= 0.0 || thickness.lo < 0.0) {
        throw std::invalid_argument("channel geometry ranges must be positive");
    }
    for (const auto& cp : conditioning) {
        if (cp.i < 0 || cp.i >= grid.nx || cp.j < 0 || cp.j >= grid.ny || cp.k < 0 || cp.k >= grid.nz) {
            throw std::invalid_argument("conditioning cell outside grid");
        }
        if (cp.facies > 1) throw std::invalid_argument("conditioning facies must be 0 or 1");
    }
    // Contradictory requirements on one cell can never be satisfied.
    for (std::size_t a = 0; a < conditioning.size(); ++a) {
        for (std::size_t b = a + 1; b < conditioning.size(); ++b) {
            const auto& ca = conditioning[a];
            const auto& cb = conditioning[b];
            if (ca.i == cb.i && ca.j == cb.j && ca.k == cb.k && ca.facies != cb.facies) {
                throw std::invalid_argument(
                    "conditioning unsatisfiable: cell (" + std::to_string(ca.i) + "," +
                    std::to_string(ca.j) + "," + std::to_string(ca.k) +
                    ") required to be both sand and mud");
            }
        }
    }
}

namespace {

struct Channel {
    double v0, amplitude, wavelength, phase, orientation, half_width;
    int z0, z1;  // layer range [z0, z1)
};

std::vector<Channel> draw_channels(const ChannelPrior& prior, Rng& rng) {
    const int n = static_cast<int>(rng.uniform_int(prior.n_channels_min, prior.n_channels_max));
    const double diag = std::hypot(prior.grid.nx, prior.grid.ny);
    std::vector<Channel> channels(static_cast<std::size_t>(n));
    for (auto& ch : channels) {
        ch.orientation = rng.uniform(prior.orientation.lo, prior.orientation.hi);
        ch.half_width = 0.5 * rng.uniform(prior.width.lo, prior.width.hi);
        ch.amplitude = rng.uniform(prior.amplitude.lo, prior.amplitude.hi);
        ch.wavelength = rng.uniform(prior.wavelength.lo, prior.wavelength.hi);
        ch.phase = rng.uniform(0.0, 2.0 * M_PI);
        // Offset drawn over the rotated-frame extent of the domain.
        ch.v0 = rng.uniform(-0.6 * diag, 0.6 * diag);
        const double thick = rng.uniform(prior.thickness.lo, prior.thickness.hi);
        const int t = std::max(1, static_cast<int>(std::lround(thick)));
        const int zmax = std::max(0, prior.grid.nz - t);
        ch.z0 = static_cast<int>(rng.uniform_int(0, zmax));
        ch.z1 = std::min(prior.grid.nz, ch.z0 + t);
    }
    return channels;
}

void rasterize(const ChannelPrior& prior, const std::vector<Channel>& channels,
               std::vector<std::uint8_t>& facies) {
    const Grid& g = prior.grid;
    std::fill(facies.begin(), facies.end(), std::uint8_t{0});
    const double cx = 0.5 * g.nx;
    const double cy = 0.5 * g.ny;
    for (const auto& ch : channels) {
        const double ca = std::cos(ch.orientation);
        const double sa = std::sin(ch.orientation);
        for (int k = ch.z0; k < ch.z1; ++k) {
            for (int j = 0; j < g.ny; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    const double px = (i + 0.5) - cx;
                    const double py = (j + 0.5) - cy;
                    const double u = ca * px + sa * py;
                    const double v = -sa * px + ca * py;
                    const double center =
                        ch.v0 + ch.amplitude * std::sin(2.0 * M_PI * u / ch.wavelength + ch.phase);
                    if (std::abs(v - center) <= ch.half_width) {
                        facies[static_cast<std::size_t>(g.cell(i, j, k))] = 1;
                    }
                }
            }
        }
    }
}

bool conditioning_satisfied(const ChannelPrior& prior, const std::vector<std::uint8_t>& facies) {
    for (const auto& cp : prior.conditioning) {
        if (facies[static_cast<std::size_t>(prior.grid.cell(cp.i, cp.j, cp.k))] != cp.facies) {
            return false;
        }
    }
    return true;
}

}  // namespace

FineGeomodel generate_realization(const ChannelPrior& prior, std::uint64_t seed) {
    prior.validate();
    Rng rng(Rng::mix(seed, 0x67656f6dULL));
    FineGeomodel model;
    model.grid = prior.grid;
    model.rock = prior.rock;
    model.facies.assign(static_cast<std::size_t>(prior.grid.ncells()), 0);

    for (int attempt = 0; attempt <= prior.max_retries; ++attempt) {
        const auto channels = draw_channels(prior, rng);
        rasterize(prior, channels, model.facies);
        if (conditioning_satisfied(prior, model.facies)) return model;
    }
    // Retry budget exhausted: keep the last draw and force the conditioning cells.
    for (const auto& cp : prior.conditioning) {
        model.facies[static_cast<std::size_t>(prior.grid.cell(cp.i, cp.j, cp.k))] = cp.facies;
    }
    return model;
}

void save_geomodel(const FineGeomodel& model, const std::string& path) {
    model.validate();
    nlohmann::json header{
        {"format", "mfres.geomodel.v1"},
        {"nx", model.grid.nx}, {"ny", model.grid.ny}, {"nz", model.grid.nz},
        {"dx", model.grid.dx}, {"dy", model.grid.dy}, {"dz", model.grid.dz},
        {"datum_depth", model.grid.datum_depth},
        {"rock_map", {{"sand_poro", model.rock.sand_poro},
                      {"mud_poro", model.rock.mud_poro},
                      {"sand_perm", model.rock.sand_perm},
                      {"mud_perm", model.rock.mud_perm}}},
    };
    BlobWriter writer(std::move(header));
    writer.add_u8(model.facies);
    writer.save(path);
}

FineGeomodel load_geomodel(const std::string& path) {
    BlobReader reader(path);
    const auto& h = reader.header();
    if (h.value("format", "") != std::string("mfres.geomodel.v1")) {
        throw std::runtime_error("not a geomodel file: " + path);
    }
    FineGeomodel model;
    model.grid.nx = h.at("nx");
    model.grid.ny = h.at("ny");
    model.grid.nz = h.at("nz");
    model.grid.dx = h.at("dx");
    model.grid.dy = h.at("dy");
    model.grid.dz = h.at("dz");
    model.grid.datum_depth = h.at("datum_depth");
    const auto& rm = h.at("rock_map");
    model.rock.sand_poro = rm.at("sand_poro");
    model.rock.mud_poro = rm.at("mud_poro");
    model.rock.sand_perm = rm.at("sand_perm");
    model.rock.mud_perm = rm.at("mud_perm");
    model.facies = reader.read_u8(static_cast<std::size_t>(model.grid.ncells()));
    model.validate();
    return model;
}

}  // namespace mfres
