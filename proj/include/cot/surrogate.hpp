#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cot/error.hpp"
#include "cot/rng.hpp"
#include "cot/types.hpp"

// Desk-scale surrogate forward model: samples Lambertian surfaces and cloud
// scenes, then computes 12-band TOA reflectance with a nonabsorbing
// two-stream cloud layer over the surface plus multiplicative gas
// attenuation.  Ground-truth COT is known by construction.
namespace cot {

enum class SurfaceFamily : int {
    vegetation = 0,
    rock = 1,
    non_photosynthetic_vegetation = 2,
    water = 3,
    soil = 4,
};

inline const char* surface_family_name(SurfaceFamily f) {
    switch (f) {
        case SurfaceFamily::vegetation: return "vegetation";
        case SurfaceFamily::rock: return "rock";
        case SurfaceFamily::non_photosynthetic_vegetation: return "npv";
        case SurfaceFamily::water: return "water";
        case SurfaceFamily::soil: return "soil";
    }
    return "unknown";
}

struct SurfaceSpectrum {
    SurfaceFamily surface_family = SurfaceFamily::vegetation;
    std::array<double, kNumBands> albedo{};
    int profile_id = 0;  // index into the global sub-prototype table
};

struct SceneParams {
    CloudType cloud_type = CloudType::clear;
    double cot = 0.0;
    double asymmetry = 0.85;                       // two-stream g
    std::array<double, kNumBands> swir_absorption{};  // multiplies cloud reflectance per band
    double sun_zenith_deg = 0.0;
    double sat_zenith_deg = 0.0;
    double azimuth_diff_deg = 0.0;
    double gas_optical_thickness = 0.0;
    double water_vapour = 0.0;
};

namespace surf {

struct SubPrototype {
    SurfaceFamily family;
    const char* name;
    double weight;  // within-family mixing weight
    std::array<double, kNumBands> albedo;
};

// Fixed prototype spectra (B02..B12).  Values are hand-set to get realistic
// *ordering*, not spectroscopic fidelity: vegetation has the red-edge step,
// water is dark everywhere, snow (inside the water family) is bright in VIS
// and dark in SWIR, rock/soil rise slowly with wavelength.  The bright rock
// and snow entries deliberately overlap thin-cloud reflectances so the
// regression problem stays nonlinear.
inline const std::array<SubPrototype, 14>& sub_prototypes() {
    using F = SurfaceFamily;
    static const std::array<SubPrototype, 14> table = {{
        {F::vegetation, "grass", 0.50, {0.03, 0.07, 0.04, 0.11, 0.28, 0.40, 0.45, 0.47, 0.44, 0.40, 0.22, 0.11}},
        {F::vegetation, "tree", 0.30, {0.02, 0.05, 0.03, 0.08, 0.20, 0.30, 0.36, 0.38, 0.36, 0.33, 0.16, 0.08}},
        {F::vegetation, "shrub", 0.20, {0.05, 0.10, 0.07, 0.15, 0.32, 0.42, 0.48, 0.50, 0.47, 0.43, 0.28, 0.15}},
        {F::rock, "gneiss", 0.30, {0.12, 0.15, 0.18, 0.21, 0.24, 0.26, 0.28, 0.29, 0.29, 0.28, 0.33, 0.34}},
        {F::rock, "limestone", 0.40, {0.45, 0.52, 0.58, 0.61, 0.63, 0.64, 0.65, 0.66, 0.65, 0.63, 0.60, 0.55}},
        {F::rock, "marble", 0.30, {0.60, 0.65, 0.68, 0.70, 0.71, 0.72, 0.72, 0.72, 0.71, 0.69, 0.62, 0.58}},
        {F::non_photosynthetic_vegetation, "dry_grass", 0.50, {0.10, 0.16, 0.24, 0.31, 0.36, 0.39, 0.42, 0.44, 0.45, 0.44, 0.50, 0.42}},
        {F::non_photosynthetic_vegetation, "bark", 0.50, {0.06, 0.09, 0.13, 0.17, 0.21, 0.23, 0.26, 0.27, 0.28, 0.28, 0.33, 0.29}},
        {F::water, "liquid", 0.40, {0.05, 0.04, 0.03, 0.02, 0.015, 0.012, 0.010, 0.008, 0.006, 0.005, 0.003, 0.002}},
        {F::water, "fine_snow", 0.25, {0.96, 0.95, 0.94, 0.92, 0.88, 0.84, 0.78, 0.72, 0.65, 0.38, 0.10, 0.06}},
        {F::water, "coarse_snow", 0.20, {0.88, 0.86, 0.84, 0.81, 0.76, 0.71, 0.65, 0.59, 0.52, 0.30, 0.09, 0.05}},
        {F::water, "ice", 0.15, {0.60, 0.58, 0.56, 0.53, 0.49, 0.45, 0.41, 0.37, 0.33, 0.20, 0.07, 0.04}},
        {F::soil, "loam", 0.50, {0.06, 0.09, 0.13, 0.17, 0.21, 0.24, 0.27, 0.29, 0.30, 0.30, 0.34, 0.36}},
        {F::soil, "bright_sand", 0.50, {0.28, 0.35, 0.42, 0.47, 0.51, 0.53, 0.55, 0.56, 0.56, 0.55, 0.58, 0.57}},
    }};
    return table;
}

// Target family frequencies.  The published percentages are rounded and sum
// to 1.001, so we renormalize by the sum when sampling.
inline const std::array<double, 5>& family_probabilities() {
    static const std::array<double, 5> p = {0.705, 0.107, 0.079, 0.058, 0.052};
    return p;
}

// Per-band sensitivity of the airmass term to column water vapour; strongest
// on the vapour bands B09/B10, mild over the window bands.
inline const std::array<double, kNumBands>& water_vapour_sensitivity() {
    static const std::array<double, kNumBands> s = {
        0.02, 0.02, 0.03, 0.04, 0.06, 0.08, 0.10, 0.15, 0.55, 0.80, 0.20, 0.25};
    return s;
}

inline constexpr double kAlbedoJitter = 0.05;

// COT prior: right-skewed gamma (mode < 1, median ~5) truncated to [0,50],
// which keeps the bulk of cloudy samples optically thin.
inline constexpr double kCotGammaShape = 1.15;
inline constexpr double kCotGammaScale = 6.5;

inline constexpr double kSunZenithMaxDeg = 70.0;
inline constexpr double kSatZenithMaxDeg = 60.0;
inline constexpr double kGasMin = 0.05;
inline constexpr double kGasMax = 0.09;
inline constexpr double kWaterVapourMax = 5.0;

}  // namespace surf

inline SurfaceFamily surface_family_of(int profile_id) {
    const auto& table = surf::sub_prototypes();
    require(profile_id >= 0 && static_cast<std::size_t>(profile_id) < table.size(),
            Errc::out_of_range, "surface profile id " + std::to_string(profile_id));
    return table[static_cast<std::size_t>(profile_id)].family;
}

// Draw order (part of the determinism contract): family, sub-prototype, then
// one jitter per band.
inline SurfaceSpectrum sample_surface(Rng& rng) {
    const auto& probs = surf::family_probabilities();
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = rng.uniform() * total;
    std::size_t family = probs.size() - 1;
    double acc = 0.0;
    for (std::size_t f = 0; f < probs.size(); ++f) {
        acc += probs[f];
        if (u < acc) {
            family = f;
            break;
        }
    }

    const auto& table = surf::sub_prototypes();
    double fam_weight = 0.0;
    for (const auto& sub : table) {
        if (static_cast<std::size_t>(sub.family) == family) fam_weight += sub.weight;
    }
    const double us = rng.uniform() * fam_weight;
    std::size_t pick = 0;
    double acc_w = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (static_cast<std::size_t>(table[k].family) != family) continue;
        acc_w += table[k].weight;
        pick = k;
        if (us < acc_w) break;
    }

    SurfaceSpectrum s;
    s.surface_family = table[pick].family;
    s.profile_id = static_cast<int>(pick);
    for (std::size_t b = 0; b < kNumBands; ++b) {
        const double a = table[pick].albedo[b] + rng.uniform(-surf::kAlbedoJitter, surf::kAlbedoJitter);
        s.albedo[b] = std::min(1.0, std::max(0.0, a));
    }
    return s;
}

// Draw order: cot (cloudy parts only; rejection until <= 50), sun zenith,
// sat zenith, azimuth, gas, water vapour.
inline SceneParams sample_scene(Rng& rng, CloudType part) {
    SceneParams sc;
    sc.cloud_type = part;
    sc.swir_absorption.fill(1.0);
    if (part != CloudType::clear) {
        double cot = rng.gamma(surf::kCotGammaShape, surf::kCotGammaScale);
        while (cot > kCotMax) cot = rng.gamma(surf::kCotGammaShape, surf::kCotGammaScale);
        sc.cot = cot;
        // Phase signature: ice absorbs more in SWIR and scatters slightly
        // less forward; mixed phase sits between.
        double swir = 1.0;
        switch (part) {
            case CloudType::water: sc.asymmetry = 0.85; swir = 0.95; break;
            case CloudType::ice: sc.asymmetry = 0.80; swir = 0.85; break;
            default: sc.asymmetry = 0.825; swir = 0.90; break;
        }
        sc.swir_absorption[10] = swir;  // B11
        sc.swir_absorption[11] = swir;  // B12
    }
    sc.sun_zenith_deg = rng.uniform(0.0, surf::kSunZenithMaxDeg);
    sc.sat_zenith_deg = rng.uniform(0.0, surf::kSatZenithMaxDeg);
    sc.azimuth_diff_deg = rng.uniform(0.0, 360.0);
    sc.gas_optical_thickness = rng.uniform(surf::kGasMin, surf::kGasMax);
    sc.water_vapour = rng.uniform(0.0, surf::kWaterVapourMax);
    return sc;
}

// Two-stream TOA reflectance over a Lambertian surface.
//   x    = (1-g) * (cot/mu0) / 2          (scaled slant optical thickness)
//   R_c  = swir_b * x / (1+x)             (cloud-only reflectance)
//   R    = R_c + T^2 A / (1 - A R_c)      (multiple cloud-surface bounces)
//   out  = clamp(R * exp(-gas * m_b), 0, 1.2)
// with per-band airmass m_b = (1/mu0 + 1/muv) * (1 + wv_sens_b * wvp).
inline std::array<double, kNumBands> toa_reflectance(const SceneParams& scene,
                                                     const SurfaceSpectrum& surface) {
    require(scene.sun_zenith_deg >= 0.0 && scene.sun_zenith_deg < 90.0 &&
                scene.sat_zenith_deg >= 0.0 && scene.sat_zenith_deg < 90.0,
            Errc::degenerate_geometry,
            "zenith angles must lie in [0, 90), got sun=" + std::to_string(scene.sun_zenith_deg) +
                " sat=" + std::to_string(scene.sat_zenith_deg));
    constexpr double kDegToRad = 0.017453292519943295;
    const double mu0 = std::cos(scene.sun_zenith_deg * kDegToRad);
    const double muv = std::cos(scene.sat_zenith_deg * kDegToRad);
    const double slant = scene.cot / mu0;
    const double x = 0.5 * (1.0 - scene.asymmetry) * slant;
    const double x_ratio = x / (1.0 + x);
    const double airmass = 1.0 / mu0 + 1.0 / muv;
    const auto& wv = surf::water_vapour_sensitivity();

    std::array<double, kNumBands> out{};
    for (std::size_t b = 0; b < kNumBands; ++b) {
        const double rc = scene.swir_absorption[b] * x_ratio;
        const double t = 1.0 - rc;
        const double a = surface.albedo[b];
        const double r = rc + t * t * a / (1.0 - a * rc);
        const double mb = airmass * (1.0 + wv[b] * scene.water_vapour);
        const double v = r * std::exp(-scene.gas_optical_thickness * mb);
        out[b] = std::min(kReflectanceMax, std::max(0.0, v));
    }
    return out;
}

struct GenerateOptions {
    // Fraction of cloudy-part samples whose cloud is removed (COT forced to 0
    // and reflectance recomputed cloud-free) while the cloudy type id stays.
    double cloudy_zero_fraction = 0.0;
};

// n/4 samples per part (clear, water, ice, mixed), interleaved as i mod 4.
// Sample i draws everything from its own (seed, i) stream, so generation is
// order- and worker-independent.
inline Dataset generate_dataset(std::size_t n, std::uint64_t seed, const GenerateOptions& opts = {}) {
    require(n % 4 == 0, Errc::bad_count, "n=" + std::to_string(n) + " is not divisible by 4");
    require(opts.cloudy_zero_fraction >= 0.0 && opts.cloudy_zero_fraction <= 1.0, Errc::out_of_range,
            "cloudy_zero_fraction=" + std::to_string(opts.cloudy_zero_fraction));
    Dataset d;
    d.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, Stream::sample, i);
        const auto part = static_cast<CloudType>(i % 4);
        const SurfaceSpectrum surface = sample_surface(rng);
        SceneParams scene = sample_scene(rng, part);
        if (part != CloudType::clear && opts.cloudy_zero_fraction > 0.0 &&
            rng.uniform() < opts.cloudy_zero_fraction) {
            scene.cot = 0.0;  // consistency-failure point: label kept, cloud gone
        }
        const auto bands = toa_reflectance(scene, surface);

        LabeledSample s;
        s.bands.assign(bands.begin(), bands.end());
        s.sat_zenith_deg = scene.sat_zenith_deg;
        s.sun_zenith_deg = scene.sun_zenith_deg;
        s.azimuth_diff_deg = scene.azimuth_diff_deg;
        s.gas_optical_thickness = scene.gas_optical_thickness;
        s.water_vapour = scene.water_vapour;
        s.surface_profile_id = surface.profile_id;
        s.cloud_type_id = static_cast<int>(scene.cloud_type);
        s.cot = scene.cot;
        validate_sample(s);
        d.samples.push_back(std::move(s));
    }
    return d;
}

// Renders a flat H*W*12 TOA field (band-interleaved by pixel) with one shared
// viewing geometry and per-pixel random surfaces; pixel (i,j) gets the
// caller-supplied COT under a water-phase cloud.  Pixel k uses stream
// (seed, k+1); stream (seed, 0) holds the shared geometry.
inline std::vector<double> render_cot_field(int height, int width,
                                            const std::vector<double>& cots,
                                            std::uint64_t seed) {
    require(height > 0 && width > 0, Errc::bad_shape, "raster dimensions must be positive");
    require(cots.size() == static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
            Errc::length_mismatch, "COT field size does not match raster dimensions");

    Rng geo = Rng::stream(seed, Stream::raster, 0);
    SceneParams scene;
    scene.cloud_type = CloudType::water;
    scene.asymmetry = 0.85;
    scene.swir_absorption.fill(1.0);
    scene.swir_absorption[10] = scene.swir_absorption[11] = 0.95;
    scene.sun_zenith_deg = geo.uniform(20.0, 50.0);
    scene.sat_zenith_deg = geo.uniform(0.0, 30.0);
    scene.azimuth_diff_deg = geo.uniform(0.0, 360.0);
    scene.gas_optical_thickness = geo.uniform(surf::kGasMin, surf::kGasMax);
    scene.water_vapour = geo.uniform(0.0, surf::kWaterVapourMax);

    std::vector<double> data(cots.size() * kNumBands);
    for (std::size_t k = 0; k < cots.size(); ++k) {
        Rng rng = Rng::stream(seed, Stream::raster, k + 1);
        const SurfaceSpectrum surface = sample_surface(rng);
        scene.cot = cots[k];
        const auto bands = toa_reflectance(scene, surface);
        for (std::size_t b = 0; b < kNumBands; ++b) data[k * kNumBands + b] = bands[b];
    }
    return data;
}

}  // namespace cot
