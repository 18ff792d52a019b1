#include "mfres/pca.hpp"

#include "mfres/blobfile.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace mfres {

void PcaParameterization::validate() const {
    grid.validate();
    const auto nc = static_cast<std::size_t>(grid.ncells());
    if (mean.size() != nc) throw std::invalid_argument("pca mean size mismatch");
    if (basis.size() != nc * singular_values.size()) {
        throw std::invalid_argument("pca basis size mismatch");
    }
    for (double s : singular_values) {
        if (s < 0.0 || !std::isfinite(s)) throw std::invalid_argument("singular values must be >= 0");
    }
}

std::vector<double> PcaParameterization::continuous_field(const std::vector<double>& xi) const {
    if (static_cast<int>(xi.size()) != n_latent()) {
        throw std::invalid_argument("latent vector length does not match parameterization");
    }
    const auto nc = static_cast<std::size_t>(grid.ncells());
    std::vector<double> field(mean);
    for (int k = 0; k < n_latent(); ++k) {
        const double w = xi[static_cast<std::size_t>(k)] * singular_values[static_cast<std::size_t>(k)];
        if (w == 0.0) continue;
        const double* mode = basis.data() + static_cast<std::size_t>(k) * nc;
        for (std::size_t c = 0; c < nc; ++c) field[c] += w * mode[c];
    }
    return field;
}

PcaParameterization fit_pca(const std::vector<FineGeomodel>& realizations, int n_latent,
                            double threshold, std::vector<ConditioningPoint> conditioning) {
    if (realizations.empty()) throw std::invalid_argument("no realizations");
    const int n_s = static_cast<int>(realizations.size());
    if (n_latent < 1 || n_latent > n_s - 1) {
        throw std::invalid_argument("n_latent must be in [1, n_samples - 1]");
    }
    const Grid grid = realizations.front().grid;
    const int nc = grid.ncells();
    for (const auto& r : realizations) {
        if (!(r.grid == grid)) throw std::invalid_argument("realizations on different grids");
    }

    Eigen::MatrixXd data(n_s, nc);
    for (int s = 0; s < n_s; ++s) {
        for (int c = 0; c < nc; ++c) {
            data(s, c) = static_cast<double>(realizations[static_cast<std::size_t>(s)]
                                                 .facies[static_cast<std::size_t>(c)]);
        }
    }
    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const auto& v = svd.matrixV();

    PcaParameterization param;
    param.grid = grid;
    param.rock = realizations.front().rock;
    param.threshold = threshold;
    param.conditioning = std::move(conditioning);
    param.mean.assign(mean.data(), mean.data() + nc);
    param.singular_values.resize(static_cast<std::size_t>(n_latent));
    param.basis.resize(static_cast<std::size_t>(n_latent) * static_cast<std::size_t>(nc));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_s - 1));
    for (int k = 0; k < n_latent; ++k) {
        param.singular_values[static_cast<std::size_t>(k)] = sv(k) * scale;
        for (int c = 0; c < nc; ++c) {
            param.basis[static_cast<std::size_t>(k) * static_cast<std::size_t>(nc) +
                        static_cast<std::size_t>(c)] = v(c, k);
        }
    }

    // Truncation quality over the training set, reported with the fit.
    double worst = 0.0;
    for (int s = 0; s < n_s; ++s) {
        Eigen::VectorXd coeffs = v.leftCols(n_latent).transpose() * data.row(s).transpose();
        Eigen::VectorXd recon = v.leftCols(n_latent) * coeffs;
        const double rms = std::sqrt((data.row(s).transpose() - recon).squaredNorm() / nc);
        worst = std::max(worst, rms);
    }
    param.fit_residual = worst;
    return param;
}

FineGeomodel decode(const PcaParameterization& param, const std::vector<double>& xi) {
    param.validate();
    const auto field = param.continuous_field(xi);
    FineGeomodel model;
    model.grid = param.grid;
    model.rock = param.rock;
    model.facies.resize(field.size());
    for (std::size_t c = 0; c < field.size(); ++c) {
        model.facies[c] = field[c] >= param.threshold ? 1 : 0;
    }
    for (const auto& cp : param.conditioning) {
        model.facies[static_cast<std::size_t>(param.grid.cell(cp.i, cp.j, cp.k))] = cp.facies;
    }
    return model;
}

std::vector<double> encode(const PcaParameterization& param, const FineGeomodel& model) {
    param.validate();
    if (!(model.grid == param.grid)) throw std::invalid_argument("grid mismatch in encode");
    const auto nc = static_cast<std::size_t>(param.grid.ncells());
    std::vector<double> centered(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        centered[c] = static_cast<double>(model.facies[c]) - param.mean[c];
    }
    std::vector<double> xi(static_cast<std::size_t>(param.n_latent()), 0.0);
    for (int k = 0; k < param.n_latent(); ++k) {
        const double s = param.singular_values[static_cast<std::size_t>(k)];
        if (s <= 0.0) continue;
        const double* mode = param.basis.data() + static_cast<std::size_t>(k) * nc;
        double dot = 0.0;
        for (std::size_t c = 0; c < nc; ++c) dot += mode[c] * centered[c];
        xi[static_cast<std::size_t>(k)] = dot / s;
    }
    return xi;
}

void save_pca(const PcaParameterization& param, const std::string& path) {
    param.validate();
    nlohmann::json cond = nlohmann::json::array();
    for (const auto& cp : param.conditioning) {
        cond.push_back({{"i", cp.i}, {"j", cp.j}, {"k", cp.k}, {"facies", cp.facies}});
    }
    nlohmann::json header{
        {"format", "mfres.pca.v1"},
        {"nx", param.grid.nx}, {"ny", param.grid.ny}, {"nz", param.grid.nz},
        {"dx", param.grid.dx}, {"dy", param.grid.dy}, {"dz", param.grid.dz},
        {"datum_depth", param.grid.datum_depth},
        {"rock_map", {{"sand_poro", param.rock.sand_poro},
                      {"mud_poro", param.rock.mud_poro},
                      {"sand_perm", param.rock.sand_perm},
                      {"mud_perm", param.rock.mud_perm}}},
        {"n_latent", param.n_latent()},
        {"threshold", param.threshold},
        {"fit_residual", param.fit_residual},
        {"conditioning", cond},
    };
    BlobWriter writer(std::move(header));
    writer.add_f64(param.mean);
    writer.add_f64(param.basis);
    writer.add_f64(param.singular_values);
    writer.save(path);
}

PcaParameterization load_pca(const std::string& path) {
    BlobReader reader(path);
    const auto& h = reader.header();
    if (h.value("format", "") != std::string("mfres.pca.v1")) {
        throw std::runtime_error("not a pca file: " + path);
    }
    PcaParameterization param;
    param.grid.nx = h.at("nx");
    param.grid.ny = h.at("ny");
    param.grid.nz = h.at("nz");
    param.grid.dx = h.at("dx");
    param.grid.dy = h.at("dy");
    param.grid.dz = h.at("dz");
    param.grid.datum_depth = h.at("datum_depth");
    const auto& rm = h.at("rock_map");
    param.rock.sand_poro = rm.at("sand_poro");
    param.rock.mud_poro = rm.at("mud_poro");
    param.rock.sand_perm = rm.at("sand_perm");
    param.rock.mud_perm = rm.at("mud_perm");
    param.threshold = h.at("threshold");
    param.fit_residual = h.at("fit_residual");
    for (const auto& c : h.at("conditioning")) {
        param.conditioning.push_back(
            {c.at("i"), c.at("j"), c.at("k"), static_cast<std::uint8_t>(c.at("facies"))});
    }
    const int n_latent = h.at("n_latent");
    const auto nc = static_cast<std::size_t>(param.grid.ncells());
    param.mean = reader.read_f64(nc);
    param.basis = reader.read_f64(nc * static_cast<std::size_t>(n_latent));
    param.singular_values = reader.read_f64(static_cast<std::size_t>(n_latent));
    param.validate();
    return param;
}

}  // namespace mfres
