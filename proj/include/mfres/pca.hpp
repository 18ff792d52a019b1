#pragma once

#include "mfres/geomodel.hpp"

#include <string>
#include <vector>

namespace mfres {

// Truncated PCA over binary facies fields. Latent components are standard
// normal: the stored singular values are scaled so that
//   field(xi) = mean + sum_k xi_k * singular_values[k] * basis[k]
// reproduces the training-sample covariance.
struct PcaParameterization {
    Grid grid;
    RockMap rock;
    std::vector<double> mean;             // per cell
    std::vector<double> basis;            // mode-major: basis[k*ncells + c]
    std::vector<double> singular_values;  // length n_latent, descending
    double threshold = 0.5;               // sand where continuous >= threshold
    std::vector<ConditioningPoint> conditioning;
    double fit_residual = 0.0;  // max training-sample RMS reconstruction error

    int n_latent() const { return static_cast<int>(singular_values.size()); }
    void validate() const;

    // Continuous field before thresholding.
    std::vector<double> continuous_field(const std::vector<double>& xi) const;
};

PcaParameterization fit_pca(const std::vector<FineGeomodel>& realizations, int n_latent,
                            double threshold = 0.5,
                            std::vector<ConditioningPoint> conditioning = {});

FineGeomodel decode(const PcaParameterization& param, const std::vector<double>& xi);

// Projection of a realization onto the retained modes.
std::vector<double> encode(const PcaParameterization& param, const FineGeomodel& model);

void save_pca(const PcaParameterization& param, const std::string& path);
PcaParameterization load_pca(const std::string& path);

}  // namespace mfres
