#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfres {

// Structured Cartesian grid. Cells are indexed x-fastest, then y, then z:
// cell(i,j,k) = i + nx*(j + ny*k), all 0-based.
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    double dx = 0.0, dy = 0.0, dz = 0.0;  // m
    double datum_depth = 0.0;             // m

    int ncells() const { return nx * ny * nz; }
    int cell(int i, int j, int k) const { return i + nx * (j + ny * k); }
    double cell_volume() const { return dx * dy * dz; }
    // Depth of the center of layer k (0-based), positive downward.
    double depth(int k) const { return datum_depth + (k + 0.5) * dz; }

    void validate() const;
    bool operator==(const Grid&) const = default;
};

// Porosity/permeability assigned per facies code (0 = mud, 1 = sand).
struct RockMap {
    double sand_poro = 0.25;
    double mud_poro = 0.10;
    double sand_perm = 2000.0;  // md, isotropic
    double mud_perm = 20.0;

    double poro(std::uint8_t facies) const { return facies ? sand_poro : mud_poro; }
    double perm(std::uint8_t facies) const { return facies ? sand_perm : mud_perm; }
    void validate() const;
    bool operator==(const RockMap&) const = default;
};

struct FineGeomodel {
    Grid grid;
    RockMap rock;
    std::vector<std::uint8_t> facies;  // x-fastest, values in {0,1}

    double poro(int c) const { return rock.poro(facies[c]); }
    double perm(int c) const { return rock.perm(facies[c]); }
    void validate() const;
};

struct ConditioningPoint {
    int i = 0, j = 0, k = 0;
    std::uint8_t facies = 1;
};

// Sinusoidal channel prior: each channel is a band of half `width` around
// the centerline v(u) = v0 + amplitude*sin(2*pi*u/wavelength + phase) in a
// frame rotated by `orientation`, extruded over `thickness` layers.
// All geometric quantities are in grid units (cells).
struct UniformRange {
    double lo = 0.0, hi = 0.0;
    bool valid() const { return hi >= lo; }
};

struct ChannelPrior {
    Grid grid;
    RockMap rock;
    int n_channels_min = 2, n_channels_max = 5;
    UniformRange width{2.0, 4.0};
    UniformRange amplitude{1.0, 4.0};
    UniformRange wavelength{8.0, 24.0};
    UniformRange orientation{-0.6, 0.6};  // radians about +x
    UniformRange thickness{2.0, 4.0};     // layers
    std::vector<ConditioningPoint> conditioning;
    int max_retries = 1000;

    void validate() const;
};

// Deterministic in (prior, seed). Honors every conditioning cell: rejection
// sampling up to prior.max_retries, then direct facies override.
FineGeomodel generate_realization(const ChannelPrior& prior, std::uint64_t seed);

// geomodel file: JSON header + raw u8 facies blob
void save_geomodel(const FineGeomodel& model, const std::string& path);
FineGeomodel load_geomodel(const std::string& path);

}  // namespace mfres
