#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cot/error.hpp"
#include "cot/rng.hpp"

namespace cot {

// Sentinel-2 band order used throughout: the 12 L1C reflective bands with
// B8A between B08 and B09.  B10 (cirrus) is index 9 and is the one band that
// may be absent (Level-2A products drop it).
inline constexpr std::size_t kNumBands = 12;
inline constexpr std::size_t kCirrusBandIndex = 9;
inline constexpr double kCotMax = 50.0;
inline constexpr double kReflectanceMax = 1.2;

inline const std::array<std::string, kNumBands>& band_names() {
    static const std::array<std::string, kNumBands> names = {
        "b02", "b03", "b04", "b05", "b06", "b07",
        "b08", "b8a", "b09", "b10", "b11", "b12"};
    return names;
}

// Cloud regime of a training point.  COT 0 with a cloudy id is legal: it
// models points whose cloud was removed but whose label survived.
enum class CloudType : int {
    clear = 0,
    water = 1,
    ice = 2,
    mixed = 3,
};

struct LabeledSample {
    std::vector<double> bands;  // 12 TOA reflectances, or 11 without B10
    double sat_zenith_deg = 0.0;
    double sun_zenith_deg = 0.0;
    double azimuth_diff_deg = 0.0;
    double gas_optical_thickness = 0.0;
    double water_vapour = 0.0;  // column, cm
    int surface_profile_id = 0;
    int cloud_type_id = 0;
    double cot = 0.0;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    // Always the 12 canonical identifiers; cirrus_present says whether B10's
    // column actually exists in the samples (false => 11 bands per sample).
    std::vector<std::string> band_names{cot::band_names().begin(), cot::band_names().end()};
    bool cirrus_present = true;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::size_t band_count() const { return cirrus_present ? kNumBands : kNumBands - 1; }
};

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

namespace detail {

inline void check_field(bool ok, const std::string& field, double value) {
    if (!ok) fail(Errc::out_of_range, field + "=" + std::to_string(value));
}

}  // namespace detail

// Checks every physical-range invariant; returns its argument untouched so it
// can sit inline in a pipeline.
inline const LabeledSample& validate_sample(const LabeledSample& s) {
    require(s.bands.size() == kNumBands || s.bands.size() == kNumBands - 1, Errc::bad_shape,
            "sample has " + std::to_string(s.bands.size()) + " bands, expected 11 or 12");
    for (std::size_t j = 0; j < s.bands.size(); ++j) {
        const double v = s.bands[j];
        detail::check_field(std::isfinite(v) && v >= 0.0 && v <= kReflectanceMax,
                            "band " + std::to_string(j), v);
    }
    detail::check_field(std::isfinite(s.sat_zenith_deg) && s.sat_zenith_deg >= 0.0 && s.sat_zenith_deg < 90.0,
                        "sat_zenith", s.sat_zenith_deg);
    detail::check_field(std::isfinite(s.sun_zenith_deg) && s.sun_zenith_deg >= 0.0 && s.sun_zenith_deg < 90.0,
                        "sun_zenith", s.sun_zenith_deg);
    detail::check_field(std::isfinite(s.azimuth_diff_deg) && s.azimuth_diff_deg >= 0.0 && s.azimuth_diff_deg < 360.0,
                        "azim_diff", s.azimuth_diff_deg);
    detail::check_field(std::isfinite(s.gas_optical_thickness) && s.gas_optical_thickness >= 0.0,
                        "gas_ot", s.gas_optical_thickness);
    detail::check_field(std::isfinite(s.water_vapour) && s.water_vapour >= 0.0,
                        "wvp", s.water_vapour);
    detail::check_field(s.surface_profile_id >= 0, "surface_id",
                        static_cast<double>(s.surface_profile_id));
    detail::check_field(s.cloud_type_id >= 0 && s.cloud_type_id <= 3, "cloud_type",
                        static_cast<double>(s.cloud_type_id));
    detail::check_field(std::isfinite(s.cot) && s.cot >= 0.0 && s.cot <= kCotMax, "cot", s.cot);
    return s;
}

inline void validate_dataset(const Dataset& d) {
    const std::size_t expect = d.band_count();
    for (const LabeledSample& s : d.samples) {
        validate_sample(s);
        require(s.bands.size() == expect, Errc::bad_shape,
                "sample band count " + std::to_string(s.bands.size()) +
                    " does not match dataset band count " + std::to_string(expect));
    }
}

// Seeded three-way split.  Validation and test sizes are the rounded shares;
// train takes the remainder, so all n samples land in exactly one part.
inline Splits split_dataset(const Dataset& d, const SplitRatios& r, std::uint64_t seed) {
    const bool ratios_ok = r.train > 0.0 && r.val > 0.0 && r.test > 0.0 &&
                           std::abs(r.train + r.val + r.test - 1.0) <= 1e-9;
    require(ratios_ok, Errc::bad_ratios,
            "split ratios must be positive and sum to 1");
    const std::size_t n = d.size();
    require(n >= 3, Errc::bad_count, "need at least 3 samples to split, got " + std::to_string(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng::stream(seed, Stream::split);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }

    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * r.val));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * r.test));
    require(n_val + n_test < n, Errc::bad_count, "split leaves no training samples");

    Splits out;
    out.train.cirrus_present = out.val.cirrus_present = out.test.cirrus_present = d.cirrus_present;
    const std::size_t n_train = n - n_val - n_test;
    out.train.samples.reserve(n_train);
    out.val.samples.reserve(n_val);
    out.test.samples.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        const LabeledSample& s = d.samples[order[i]];
        if (i < n_train) {
            out.train.samples.push_back(s);
        } else if (i < n_train + n_val) {
            out.val.samples.push_back(s);
        } else {
            out.test.samples.push_back(s);
        }
    }
    return out;
}

// Removes B10 from every sample, yielding the 11-band (Level-2A style) view.
inline Dataset drop_cirrus_band(const Dataset& d) {
    require(d.cirrus_present, Errc::bad_shape, "dataset already lacks the cirrus band");
    Dataset out;
    out.cirrus_present = false;
    out.samples.reserve(d.size());
    for (const LabeledSample& s : d.samples) {
        require(s.bands.size() == kNumBands, Errc::bad_shape, "expected 12-band samples");
        LabeledSample t = s;
        t.bands.erase(t.bands.begin() + static_cast<std::ptrdiff_t>(kCirrusBandIndex));
        out.samples.push_back(std::move(t));
    }
    return out;
}

}  // namespace cot
