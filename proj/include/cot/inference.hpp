#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "cot/error.hpp"
#include "cot/io.hpp"
#include "cot/mlp.hpp"
#include "cot/weak_labels.hpp"

namespace cot {

// Per-pixel COT predictions for one raster; values always lie in [0, 50].
struct CotMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // row-major

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(j)];
    }
    std::size_t size() const { return values.size(); }
};

namespace detail {

inline Eigen::MatrixXd raster_rows(const RasterImage& img) {
    const auto pixels = static_cast<Eigen::Index>(img.height) * img.width;
    Eigen::MatrixXd rows(pixels, img.channels);
    for (Eigen::Index p = 0; p < pixels; ++p) {
        for (int c = 0; c < img.channels; ++c) {
            rows(p, c) = static_cast<double>(img.data[static_cast<std::size_t>(p) * img.channels + c]);
        }
    }
    return rows;
}

inline CotMap cot_map_from(const RasterImage& img, const Eigen::VectorXd& pred) {
    CotMap map;
    map.height = img.height;
    map.width = img.width;
    map.values.resize(static_cast<std::size_t>(pred.size()));
    for (Eigen::Index p = 0; p < pred.size(); ++p) {
        map.values[static_cast<std::size_t>(p)] = clamp_cot(pred(p));
    }
    return map;
}

}  // namespace detail

// Pixel-per-pixel COT prediction: every pixel's band vector runs through the
// model independently (independent pixel approximation).
inline CotMap predict_raster(const ModelBundle& model, const RasterImage& img) {
    require(img.channels == model.params.input_dim(), Errc::dimension_mismatch,
            "raster has " + std::to_string(img.channels) + " channels, model expects " +
                std::to_string(model.params.input_dim()));
    return detail::cot_map_from(img, predict_batch(model, detail::raster_rows(img)));
}

inline CotMap predict_raster(const Ensemble& ensemble, const RasterImage& img) {
    check_ensemble(ensemble);
    require(img.channels == ensemble.members.front().params.input_dim(), Errc::dimension_mismatch,
            "raster has " + std::to_string(img.channels) + " channels, ensemble expects " +
                std::to_string(ensemble.members.front().params.input_dim()));
    return detail::cot_map_from(img, predict_batch(ensemble, detail::raster_rows(img)));
}

// Overlap-averaged box smoothing: every fully-inside m-by-m window deposits
// its mean onto all its cells, and each cell averages the deposits it
// received.  Border cells simply receive fewer deposits; m=1 is the identity.
inline CotMap smooth_cot_map(const CotMap& c, int m) {
    require(c.height > 0 && c.width > 0, Errc::empty_mask, "cannot smooth an empty map");
    require(m >= 1 && m <= std::min(c.height, c.width), Errc::window_too_large,
            "window size " + std::to_string(m) + " does not fit a " + std::to_string(c.height) +
                "x" + std::to_string(c.width) + " map");
    if (m == 1) return c;

    CotMap out;
    out.height = c.height;
    out.width = c.width;
    out.values.assign(c.values.size(), 0.0);
    std::vector<double> deposits(c.values.size(), 0.0);
    const auto w = static_cast<std::size_t>(c.width);
    for (int a = 0; a + m <= c.height; ++a) {
        for (int b = 0; b + m <= c.width; ++b) {
            double sum = 0.0;
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) sum += c.values[(a + i) * w + (b + j)];
            }
            const double mean = sum / static_cast<double>(m * m);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    out.values[(a + i) * w + (b + j)] += mean;
                    deposits[(a + i) * w + (b + j)] += 1.0;
                }
            }
        }
    }
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] /= deposits[k];
    return out;
}

// Boundary rule: a value exactly on a threshold takes the cloudier class.
inline ClassMask classify_cot(const CotMap& c, const ThresholdSet& t) {
    validate_thresholds(t);
    ClassMask mask;
    mask.height = c.height;
    mask.width = c.width;
    mask.labels.resize(c.values.size());
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        const double v = c.values[k];
        mask.labels[k] = v < t.tau_semi ? 0 : (v < t.tau_opaque ? std::uint8_t{1} : std::uint8_t{2});
    }
    return mask;
}

enum class ImageVerdict {
    clear,
    cloudy,
};

inline const char* verdict_name(ImageVerdict v) {
    return v == ImageVerdict::cloudy ? "cloudy" : "clear";
}

// A single cloud-labeled pixel makes the whole image cloudy.
inline ImageVerdict image_level_label(const ClassMask& mask) {
    require(mask.height > 0 && mask.width > 0 && !mask.labels.empty(), Errc::empty_mask,
            "image-level decision needs a nonempty mask");
    for (std::uint8_t label : mask.labels) {
        if (label >= 1) return ImageVerdict::cloudy;
    }
    return ImageVerdict::clear;
}

// Binary mode: cloudy iff any pixel's COT reaches tau_binary.
inline ImageVerdict image_level_label(const CotMap& c, double tau_binary) {
    require(c.height > 0 && c.width > 0 && !c.values.empty(), Errc::empty_mask,
            "image-level decision needs a nonempty map");
    require(tau_binary > 0.0 && tau_binary <= kCotMax, Errc::out_of_range,
            "tau_binary=" + std::to_string(tau_binary) + " outside (0, 50]");
    for (double v : c.values) {
        if (v >= tau_binary) return ImageVerdict::cloudy;
    }
    return ImageVerdict::clear;
}

// COT maps ride in the COTRASTER container with a single channel.
inline void save_cot_map(const CotMap& c, const std::string& path) {
    std::vector<float> data(c.values.size());
    for (std::size_t k = 0; k < c.values.size(); ++k) data[k] = static_cast<float>(c.values[k]);
    detail::save_cotraster(path, c.height, c.width, 1, data);
}

inline CotMap load_cot_map(const std::string& path) {
    const RasterImage img = detail::load_cotraster(path);
    require(img.channels == 1, Errc::schema_mismatch,
            path + ": expected a single-channel COT map, got " + std::to_string(img.channels) +
                " channels");
    CotMap c;
    c.height = img.height;
    c.width = img.width;
    c.values.resize(img.data.size());
    for (std::size_t k = 0; k < img.data.size(); ++k) {
        c.values[k] = clamp_cot(static_cast<double>(img.data[k]));
    }
    return c;
}

}  // namespace cot
