#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>

#include "cot/error.hpp"
#include "cot/rng.hpp"
#include "cot/types.hpp"

namespace cot {

// Per-feature standardization fitted on training data only.  noise_sigma is
// the absolute per-band noise scale noise_level * mean|x_j|, frozen at fit
// time so train-time augmentation does not drift with the batch.
struct Normalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
    Eigen::VectorXd noise_sigma;
    double noise_level = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

inline Eigen::MatrixXd to_feature_matrix(const Dataset& d) {
    require(!d.empty(), Errc::empty_input, "dataset has no samples");
    const std::size_t n = d.size();
    const std::size_t dim = d.band_count();
    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const LabeledSample& s = d.samples[i];
        require(s.bands.size() == dim, Errc::bad_shape,
                "sample " + std::to_string(i) + " has " + std::to_string(s.bands.size()) + " bands");
        for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.bands[j];
    }
    return x;
}

inline Eigen::VectorXd to_target_vector(const Dataset& d) {
    Eigen::VectorXd y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) y(static_cast<Eigen::Index>(i)) = d.samples[i].cot;
    return y;
}

// Population statistics (divide by N, not N-1); zero-variance features get a
// floored std of 1e-8 instead of producing NaNs.
inline Normalizer fit_normalizer(const Eigen::MatrixXd& train_features, double noise_level) {
    require(train_features.rows() >= 2, Errc::empty_dataset,
            "need at least 2 training samples to fit a normalizer");
    require(noise_level >= 0.0 && noise_level <= 0.2, Errc::out_of_range,
            "noise_level=" + std::to_string(noise_level) + " outside [0, 0.2]");
    Normalizer nz;
    nz.noise_level = noise_level;
    nz.mean = train_features.colwise().mean();
    const Eigen::MatrixXd centered = train_features.rowwise() - nz.mean.transpose();
    nz.std = (centered.array().square().colwise().mean()).sqrt().matrix();
    nz.std = nz.std.array().max(1e-8).matrix();
    nz.noise_sigma = noise_level * train_features.array().abs().colwise().mean().matrix();
    return nz;
}

inline Normalizer fit_normalizer(const Dataset& train, double noise_level) {
    return fit_normalizer(to_feature_matrix(train), noise_level);
}

inline void check_dim(const Normalizer& nz, Eigen::Index cols, const char* where) {
    require(cols == nz.mean.size(), Errc::dimension_mismatch,
            std::string(where) + ": got " + std::to_string(cols) + " features, normalizer has " +
                std::to_string(nz.mean.size()));
}

inline Eigen::MatrixXd normalize(const Eigen::MatrixXd& x, const Normalizer& nz) {
    check_dim(nz, x.cols(), "normalize");
    return (x.rowwise() - nz.mean.transpose()).array().rowwise() / nz.std.transpose().array();
}

inline Eigen::MatrixXd denormalize(const Eigen::MatrixXd& z, const Normalizer& nz) {
    check_dim(nz, z.cols(), "denormalize");
    return (z.array().rowwise() * nz.std.transpose().array()).matrix().rowwise() + nz.mean.transpose();
}

// Adds zero-mean Gaussian noise in raw reflectance units.  Draw order is row
// by row, feature by feature, so results are independent of batch assembly.
inline void add_noise(Eigen::MatrixXd& x, const Normalizer& nz, Rng& rng) {
    check_dim(nz, x.cols(), "add_noise");
    if (nz.noise_level == 0.0) return;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            x(i, j) += rng.normal() * nz.noise_sigma(j);
        }
    }
}

// Train-time view of one sample: corrupt with band-scaled noise, then
// standardize.  Noise lives in raw units, i.e. it is added before centering.
inline Eigen::VectorXd augment_and_normalize(const Eigen::VectorXd& x, const Normalizer& nz, Rng& rng) {
    check_dim(nz, x.size(), "augment_and_normalize");
    Eigen::MatrixXd row = x.transpose();
    add_noise(row, nz, rng);
    return normalize(row, nz).transpose();
}

}  // namespace cot
