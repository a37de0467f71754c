#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cot/error.hpp"
#include "cot/mlp.hpp"
#include "cot/rng.hpp"

namespace cot {

// COT thresholds separating clear / semi-transparent / opaque, plus the
// single threshold for binary cloudy-vs-clear decisions.
struct ThresholdSet {
    double tau_semi = 0.75;
    double tau_opaque = 1.25;
    double tau_binary = 0.5;
};

inline void validate_thresholds(const ThresholdSet& t) {
    require(t.tau_semi > 0.0 && t.tau_semi < t.tau_opaque && t.tau_opaque <= kCotMax,
            Errc::out_of_range,
            "need 0 < tau_semi < tau_opaque <= 50, got " + std::to_string(t.tau_semi) + "/" +
                std::to_string(t.tau_opaque));
    require(t.tau_binary > 0.0 && t.tau_binary <= kCotMax, Errc::out_of_range,
            "tau_binary=" + std::to_string(t.tau_binary) + " outside (0, 50]");
}

enum class WeakLabel : int {
    clear = 0,
    semi = 1,
    opaque = 2,
};

struct WeakSample {
    std::vector<double> bands;
    WeakLabel label = WeakLabel::clear;
};

// Piecewise hinge-squared penalty: zero exactly on the label's target region,
// half squared distance to the nearest boundary outside it.  Value and
// derivative both vanish at the thresholds, so the loss is C1 everywhere.
//   clear:  target p <= tau_semi
//   semi:   target tau_semi <= p <= tau_opaque
//   opaque: target p >= tau_opaque
inline std::pair<double, double> weak_loss(double p, WeakLabel label, const ThresholdSet& t) {
    validate_thresholds(t);
    double excess = 0.0;  // signed distance past the violated boundary
    switch (label) {
        case WeakLabel::clear:
            if (p > t.tau_semi) excess = p - t.tau_semi;
            break;
        case WeakLabel::opaque:
            if (p < t.tau_opaque) excess = p - t.tau_opaque;
            break;
        case WeakLabel::semi:
            if (p < t.tau_semi) {
                excess = p - t.tau_semi;
            } else if (p > t.tau_opaque) {
                excess = p - t.tau_opaque;
            }
            break;
    }
    return {0.5 * excess * excess, excess};
}

inline TrainConfig finetune_defaults(std::uint64_t seed = 0) {
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.num_updates = 10000;
    cfg.learning_rate = 1e-4;
    cfg.noise_level = 0.0;  // gentler than pretraining: no input corruption
    cfg.seed = seed;
    cfg.eval_every = 1000;
    return cfg;
}

// Adam fine-tuning on the weak-label penalty with class-balanced batches:
// each batch slot first picks one of the labels present in the data
// uniformly, then a sample of that label uniformly.  Reuses the bundle's
// pretraining Normalizer; statistics are not refit.
inline ModelBundle finetune(const ModelBundle& model, const std::vector<WeakSample>& data,
                            const ThresholdSet& t, const TrainConfig& cfg) {
    validate_thresholds(t);
    validate_train_config(cfg);
    require(!data.empty(), Errc::empty_dataset, "no weak-label samples");
    const auto dim = static_cast<std::size_t>(model.params.input_dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        require(data[i].bands.size() == dim, Errc::dimension_mismatch,
                "weak sample " + std::to_string(i) + " has " + std::to_string(data[i].bands.size()) +
                    " bands, model expects " + std::to_string(dim));
    }
    if (cfg.noise_level > 0.0) {
        require(model.normalizer.noise_level > 0.0, Errc::bad_config,
                "cannot rescale noise_sigma from a noise-free normalizer");
    }

    // Bucket sample indices by label; only labels that occur can be drawn.
    std::array<std::vector<std::size_t>, 3> by_label;
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_label[static_cast<std::size_t>(data[i].label)].push_back(i);
    }
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < 3; ++c) {
        if (!by_label[c].empty()) present.push_back(c);
    }

    Eigen::MatrixXd raw(data.size(), dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i].bands[j];
        }
    }

    Normalizer nz = model.normalizer;
    if (cfg.noise_level != nz.noise_level) {
        // noise_sigma is level * mean|x|; rescale it to the fine-tune level.
        const double scale = nz.noise_level > 0.0 ? cfg.noise_level / nz.noise_level : 0.0;
        nz.noise_sigma *= scale;
        nz.noise_level = cfg.noise_level;
    }

    ModelBundle tuned = model;
    AdamState adam = make_adam_state(tuned.params, cfg.learning_rate);
    Rng rng_batch = Rng::stream(cfg.seed, Stream::batch);
    Rng rng_noise = Rng::stream(cfg.seed, Stream::noise);

    Eigen::MatrixXd xb(cfg.batch_size, dim);
    std::vector<WeakLabel> labels(static_cast<std::size_t>(cfg.batch_size));
    ForwardCache cache;
    for (long step = 1; step <= cfg.num_updates; ++step) {
        for (int r = 0; r < cfg.batch_size; ++r) {
            const std::size_t cls = present[rng_batch.below(present.size())];
            const std::vector<std::size_t>& pool = by_label[cls];
            const std::size_t idx = pool[rng_batch.below(pool.size())];
            xb.row(r) = raw.row(static_cast<Eigen::Index>(idx));
            labels[static_cast<std::size_t>(r)] = data[idx].label;
        }
        add_noise(xb, nz, rng_noise);
        const Eigen::MatrixXd zb = normalize(xb, model.normalizer);
        const Eigen::VectorXd pred = forward(tuned.params, zb, &cache);
        Eigen::VectorXd dloss(cfg.batch_size);
        for (int r = 0; r < cfg.batch_size; ++r) {
            const auto [loss, grad] = weak_loss(pred(r), labels[static_cast<std::size_t>(r)], t);
            (void)loss;
            dloss(r) = grad / static_cast<double>(cfg.batch_size);
        }
        adam_step(tuned.params, backward(tuned.params, cache, dloss), adam);
    }
    return tuned;
}

}  // namespace cot
