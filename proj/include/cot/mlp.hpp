#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cot/detail/text.hpp"
#include "cot/error.hpp"
#include "cot/features.hpp"
#include "cot/rng.hpp"
#include "cot/types.hpp"

namespace cot {

// Fully connected ReLU network.  weights[k] is (out x in); the default head
// applies ReLU to the output layer too, so raw predictions are >= 0.
struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    bool relu_head = true;

    std::size_t num_layers() const { return weights.size(); }
    Eigen::Index input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
    Eigen::Index hidden_dim() const { return weights.empty() ? 0 : weights.front().rows(); }
};

// He-uniform initialization: U(-b, b) with b = sqrt(6 / fan_in), biases zero.
// Weight draw order (layer, row, col) is part of the determinism contract.
inline MlpParams init_mlp(int input_dim, int hidden_dim, int num_layers, std::uint64_t seed,
                          bool relu_head = true) {
    require(input_dim == 11 || input_dim == 12, Errc::bad_shape,
            "input_dim must be 11 or 12, got " + std::to_string(input_dim));
    require(num_layers >= 2, Errc::bad_shape, "need at least 2 layers");
    require(hidden_dim >= 1, Errc::bad_shape, "hidden_dim must be positive");

    Rng rng = Rng::stream(seed, Stream::init);
    MlpParams p;
    p.relu_head = relu_head;
    for (int k = 0; k < num_layers; ++k) {
        const Eigen::Index in = (k == 0) ? input_dim : hidden_dim;
        const Eigen::Index out = (k == num_layers - 1) ? 1 : hidden_dim;
        const double bound = std::sqrt(6.0 / static_cast<double>(in));
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        p.weights.push_back(std::move(w));
        p.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return p;
}

// Pre- and post-activation values for every layer of one forward pass; rows
// index batch elements.
struct ForwardCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;
    std::vector<Eigen::MatrixXd> post;
};

// Batched forward pass over normalized inputs (one row per sample).
inline Eigen::VectorXd forward(const MlpParams& p, const Eigen::MatrixXd& x,
                               ForwardCache* cache = nullptr) {
    require(!p.weights.empty(), Errc::bad_shape, "uninitialized network");
    require(x.cols() == p.input_dim(), Errc::dimension_mismatch,
            "input has " + std::to_string(x.cols()) + " features, network expects " +
                std::to_string(p.input_dim()));
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
    }
    Eigen::MatrixXd z = x;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        Eigen::MatrixXd pre = (z * p.weights[k].transpose()).rowwise() + p.biases[k].transpose();
        const bool relu = (k + 1 < p.weights.size()) || p.relu_head;
        Eigen::MatrixXd post = relu ? pre.cwiseMax(0.0).eval() : pre;
        if (cache) {
            cache->pre.push_back(pre);
            cache->post.push_back(post);
        }
        z = std::move(post);
    }
    return z.col(0);
}

inline double forward_one(const MlpParams& p, const Eigen::VectorXd& x,
                          ForwardCache* cache = nullptr) {
    return forward(p, x.transpose(), cache)(0);
}

// Mean squared error and its gradient w.r.t. the predictions.
inline std::pair<double, Eigen::VectorXd> mse_loss(const Eigen::VectorXd& predicted,
                                                   const Eigen::VectorXd& target) {
    require(predicted.size() == target.size(), Errc::length_mismatch,
            "prediction/target length mismatch");
    require(predicted.size() > 0, Errc::empty_input, "empty batch");
    const Eigen::VectorXd diff = predicted - target;
    const double n = static_cast<double>(diff.size());
    return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Backpropagation through the cached forward pass.  ReLU subgradient at 0 is
// taken as 0 (strict positivity test).
inline Gradients backward(const MlpParams& p, const ForwardCache& cache,
                          const Eigen::VectorXd& dloss) {
    const std::size_t layers = p.weights.size();
    require(cache.pre.size() == layers && cache.post.size() == layers, Errc::stale_cache,
            "cache layer count does not match parameters");
    require(cache.input.cols() == p.input_dim(), Errc::stale_cache,
            "cache input width does not match parameters");
    require(dloss.size() == cache.input.rows(), Errc::stale_cache,
            "dloss length does not match cached batch size");
    for (std::size_t k = 0; k < layers; ++k) {
        require(cache.pre[k].rows() == cache.input.rows() &&
                    cache.pre[k].cols() == p.weights[k].rows(),
                Errc::stale_cache, "cached activation shape mismatch at layer " + std::to_string(k));
    }

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    // delta: dL/d(pre-activation of layer k), batch x out
    Eigen::MatrixXd delta = dloss;
    if (p.relu_head) {
        delta = delta.cwiseProduct((cache.pre.back().array() > 0.0).cast<double>().matrix());
    }
    for (std::size_t k = layers; k-- > 0;) {
        const Eigen::MatrixXd& below = (k == 0) ? cache.input : cache.post[k - 1];
        g.weights[k] = delta.transpose() * below;
        g.biases[k] = delta.colwise().sum().transpose();
        if (k > 0) {
            delta = (delta * p.weights[k])
                        .cwiseProduct((cache.pre[k - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long t = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline AdamState make_adam_state(const MlpParams& p, double lr, double beta1 = 0.9,
                                 double beta2 = 0.999, double epsilon = 1e-8) {
    require(lr > 0.0, Errc::out_of_range, "learning rate must be positive");
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(p.weights[k].rows(), p.weights[k].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(p.weights[k].rows(), p.weights[k].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(p.biases[k].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(p.biases[k].size()));
    }
    return s;
}

namespace detail {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, const AdamState& s, double bc1, double bc2) {
    m = s.beta1 * m + (1.0 - s.beta1) * grad;
    v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    param -= (s.lr * (m / bc1).array() / ((v / bc2).array().sqrt() + s.epsilon)).matrix();
}

}  // namespace detail

// One bias-corrected Adam step; mutates params and state in place.
inline void adam_step(MlpParams& p, const Gradients& g, AdamState& s) {
    require(g.weights.size() == p.weights.size() && g.biases.size() == p.biases.size(),
            Errc::shape_mismatch, "gradient layer count mismatch");
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        require(g.weights[k].rows() == p.weights[k].rows() &&
                    g.weights[k].cols() == p.weights[k].cols() &&
                    g.biases[k].size() == p.biases[k].size(),
                Errc::shape_mismatch, "gradient shape mismatch at layer " + std::to_string(k));
    }
    s.t += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        detail::adam_update(p.weights[k], g.weights[k], s.m_w[k], s.v_w[k], s, bc1, bc2);
        detail::adam_update(p.biases[k], g.biases[k], s.m_b[k], s.v_b[k], s, bc1, bc2);
    }
}

struct TrainConfig {
    int batch_size = 32;
    long num_updates = 100000;  // desk-scale default; the full recipe is 2,000,000
    double learning_rate = 3e-4;
    double noise_level = 0.03;
    std::uint64_t seed = 0;
    long eval_every = 1000;
};

inline void validate_train_config(const TrainConfig& cfg) {
    require(cfg.batch_size > 0, Errc::out_of_range, "batch_size must be positive");
    require(cfg.num_updates >= 0, Errc::out_of_range, "num_updates must be nonnegative");
    require(cfg.learning_rate > 0.0, Errc::out_of_range, "learning_rate must be positive");
    require(cfg.eval_every > 0, Errc::out_of_range, "eval_every must be positive");
    require(cfg.noise_level >= 0.0 && cfg.noise_level <= 0.2, Errc::out_of_range,
            "noise_level=" + std::to_string(cfg.noise_level) + " outside [0, 0.2]");
}

struct TrainHistory {
    struct Entry {
        long step;
        double train_loss;  // mean batch loss since the previous entry
        double val_mae;     // clean-input validation MAE
    };
    std::vector<Entry> entries;
    double initial_val_mae = 0.0;
    long best_step = 0;  // step with lowest validation MAE (0 = initialization)
    double best_val_mae = 0.0;
};

inline double clamp_cot(double v) { return std::min(kCotMax, std::max(0.0, v)); }

namespace detail {

inline double clean_mae(const MlpParams& p, const Eigen::MatrixXd& z_val,
                        const Eigen::VectorXd& y_val) {
    const Eigen::VectorXd pred = forward(p, z_val);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) acc += std::abs(clamp_cot(pred(i)) - y_val(i));
    return acc / static_cast<double>(pred.size());
}

}  // namespace detail

// MSE training on uniformly sampled batches with per-sample Gaussian input
// noise (in raw units, before normalization).  Deterministic in cfg.seed:
// init, batch indices and noise each use their own derived stream.  Returns
// the final iterate; the best-validation iterate is only logged.
inline MlpParams train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                       const Normalizer& nz, TrainHistory* history = nullptr, int hidden_dim = 64,
                       int num_layers = 5, bool relu_head = true) {
    validate_train_config(cfg);
    require(!train_set.empty(), Errc::empty_dataset, "training set is empty");
    require(!val_set.empty(), Errc::empty_dataset, "validation set is empty");
    require(nz.dim() == train_set.band_count(), Errc::dimension_mismatch,
            "normalizer dimension does not match training data");
    require(val_set.band_count() == train_set.band_count(), Errc::dimension_mismatch,
            "validation band count does not match training data");

    const Eigen::MatrixXd x_train = to_feature_matrix(train_set);
    const Eigen::VectorXd y_train = to_target_vector(train_set);
    const Eigen::MatrixXd z_val = normalize(to_feature_matrix(val_set), nz);
    const Eigen::VectorXd y_val = to_target_vector(val_set);
    const std::size_t n = train_set.size();

    MlpParams params = init_mlp(static_cast<int>(nz.dim()), hidden_dim, num_layers, cfg.seed,
                                relu_head);
    AdamState adam = make_adam_state(params, cfg.learning_rate);
    Rng rng_batch = Rng::stream(cfg.seed, Stream::batch);
    Rng rng_noise = Rng::stream(cfg.seed, Stream::noise);

    const double initial_mae = detail::clean_mae(params, z_val, y_val);
    if (history) {
        history->entries.clear();
        history->initial_val_mae = initial_mae;
        history->best_step = 0;
        history->best_val_mae = initial_mae;
    }

    Eigen::MatrixXd xb(cfg.batch_size, nz.dim());
    Eigen::VectorXd yb(cfg.batch_size);
    double loss_acc = 0.0;
    long loss_count = 0;
    ForwardCache cache;
    for (long step = 1; step <= cfg.num_updates; ++step) {
        for (int r = 0; r < cfg.batch_size; ++r) {
            const auto idx = static_cast<Eigen::Index>(rng_batch.below(n));
            xb.row(r) = x_train.row(idx);
            yb(r) = y_train(idx);
        }
        add_noise(xb, nz, rng_noise);
        const Eigen::MatrixXd zb = normalize(xb, nz);
        const Eigen::VectorXd pred = forward(params, zb, &cache);
        const auto [loss, dloss] = mse_loss(pred, yb);
        adam_step(params, backward(params, cache, dloss), adam);
        loss_acc += loss;
        loss_count += 1;

        if (history && (step % cfg.eval_every == 0 || step == cfg.num_updates)) {
            const double val_mae = detail::clean_mae(params, z_val, y_val);
            history->entries.push_back({step, loss_acc / static_cast<double>(loss_count), val_mae});
            if (val_mae < history->best_val_mae) {
                history->best_val_mae = val_mae;
                history->best_step = step;
            }
            loss_acc = 0.0;
            loss_count = 0;
        }
    }
    return params;
}

// A trained network plus everything needed to run it on raw reflectances.
struct ModelBundle {
    MlpParams params;
    Normalizer normalizer;
    TrainConfig config;
};

struct Ensemble {
    std::vector<ModelBundle> members;
};

inline void check_ensemble(const Ensemble& e) {
    require(!e.members.empty(), Errc::empty_input, "ensemble has no members");
    for (const ModelBundle& m : e.members) {
        require(m.params.input_dim() == e.members.front().params.input_dim(),
                Errc::dimension_mismatch, "ensemble members disagree on input dimension");
    }
}

// Evaluation-time prediction on raw band vectors: normalize, forward, clamp
// to the physical range [0, 50].
inline Eigen::VectorXd predict_batch(const ModelBundle& m, const Eigen::MatrixXd& raw) {
    const Eigen::VectorXd pred = forward(m.params, normalize(raw, m.normalizer));
    return pred.unaryExpr([](double v) { return clamp_cot(v); });
}

inline double predict(const ModelBundle& m, const Eigen::VectorXd& raw) {
    return predict_batch(m, raw.transpose())(0);
}

// Ensemble prediction: arithmetic mean of member predictions.
inline Eigen::VectorXd predict_batch(const Ensemble& e, const Eigen::MatrixXd& raw) {
    check_ensemble(e);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(raw.rows());
    for (const ModelBundle& m : e.members) acc += predict_batch(m, raw);
    return acc / static_cast<double>(e.members.size());
}

inline double predict(const Ensemble& e, const Eigen::VectorXd& raw) {
    return predict_batch(e, raw.transpose())(0);
}

// Uniform callable form for anything that maps raw feature rows to COT
// predictions; lets the evaluation harness treat MLPs, ensembles and the
// linear baseline identically.  Captures by reference: the model must
// outlive the predictor.
using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

inline BatchPredictor batch_predictor(const ModelBundle& m) {
    return [&m](const Eigen::MatrixXd& raw) { return predict_batch(m, raw); };
}

inline BatchPredictor batch_predictor(const Ensemble& e) {
    return [&e](const Eigen::MatrixXd& raw) { return predict_batch(e, raw); };
}

// Ordinary least squares on normalized features (normal equations with a
// 1e-8 ridge term for numerical safety).
struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    Normalizer normalizer;
};

inline LinearModel fit_linear_regression(const Dataset& train_set, const Normalizer& nz) {
    require(!train_set.empty(), Errc::empty_dataset, "training set is empty");
    require(nz.dim() == train_set.band_count(), Errc::dimension_mismatch,
            "normalizer dimension does not match training data");
    const Eigen::MatrixXd z = normalize(to_feature_matrix(train_set), nz);
    const Eigen::VectorXd y = to_target_vector(train_set);
    const Eigen::Index d = z.cols();

    Eigen::MatrixXd a(z.rows(), d + 1);
    a.leftCols(d) = z;
    a.col(d).setOnes();
    Eigen::MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += 1e-8;
    const Eigen::VectorXd rhs = a.transpose() * y;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    require(solver.info() == Eigen::Success, Errc::singular_system,
            "normal equations could not be factorized");
    const Eigen::VectorXd sol = solver.solve(rhs);
    require(sol.allFinite(), Errc::singular_system, "normal equations produced non-finite solution");

    LinearModel lm;
    lm.weights = sol.head(d);
    lm.bias = sol(d);
    lm.normalizer = nz;
    return lm;
}

inline Eigen::VectorXd predict_batch(const LinearModel& lm, const Eigen::MatrixXd& raw) {
    const Eigen::VectorXd pred =
        (normalize(raw, lm.normalizer) * lm.weights).array() + lm.bias;
    return pred.unaryExpr([](double v) { return clamp_cot(v); });
}

inline BatchPredictor batch_predictor(const LinearModel& lm) {
    return [&lm](const Eigen::MatrixXd& raw) { return predict_batch(lm, raw); };
}

// ---------------------------------------------------------------------------
// Model bundle file format
//   bytes 0..7   magic "COTMLP01"
//   u32 LE       metadata length in bytes
//   metadata     ASCII key=value lines (bands, hidden_dim, layers, relu_head,
//                seed, noise_level, batch_size, num_updates, learning_rate,
//                eval_every)
//   payload      little-endian IEEE-754 doubles: normalizer mean, std,
//                noise_sigma (bands each), then per layer W row-major and b.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr char kModelMagic[8] = {'C', 'O', 'T', 'M', 'L', 'P', '0', '1'};

}  // namespace detail

inline void save_model(const std::string& path, const ModelBundle& bundle) {
    const MlpParams& p = bundle.params;
    require(!p.weights.empty(), Errc::bad_shape, "cannot save an uninitialized network");
    require(bundle.normalizer.mean.size() == p.input_dim(), Errc::dimension_mismatch,
            "normalizer dimension does not match network input");

    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io_error, "cannot open '" + path + "' for writing");

    std::string meta;
    meta += "bands=" + std::to_string(p.input_dim()) + "\n";
    meta += "hidden_dim=" + std::to_string(p.hidden_dim()) + "\n";
    meta += "layers=" + std::to_string(p.num_layers()) + "\n";
    meta += "relu_head=" + std::string(p.relu_head ? "1" : "0") + "\n";
    meta += "seed=" + std::to_string(bundle.config.seed) + "\n";
    meta += "noise_level=" + detail::format_double(bundle.config.noise_level) + "\n";
    meta += "batch_size=" + std::to_string(bundle.config.batch_size) + "\n";
    meta += "num_updates=" + std::to_string(bundle.config.num_updates) + "\n";
    meta += "learning_rate=" + detail::format_double(bundle.config.learning_rate) + "\n";
    meta += "eval_every=" + std::to_string(bundle.config.eval_every) + "\n";

    os.write(detail::kModelMagic, 8);
    detail::put_u32(os, static_cast<std::uint32_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    for (const Eigen::VectorXd* v : {&bundle.normalizer.mean, &bundle.normalizer.std,
                                     &bundle.normalizer.noise_sigma}) {
        for (Eigen::Index i = 0; i < v->size(); ++i) detail::put_f64(os, (*v)(i));
    }
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        const Eigen::MatrixXd& w = p.weights[k];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) detail::put_f64(os, w(r, c));
        }
        for (Eigen::Index i = 0; i < p.biases[k].size(); ++i) detail::put_f64(os, p.biases[k](i));
    }
    os.flush();
    require(os.good(), Errc::io_error, "write to '" + path + "' failed");
}

inline ModelBundle load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::io_error, "cannot open '" + path + "' for reading");

    char magic[8];
    is.read(magic, 8);
    require(is.gcount() == 8 && std::memcmp(magic, detail::kModelMagic, 8) == 0,
            Errc::version_mismatch, "'" + path + "' is not a COTMLP01 model bundle");

    const std::uint32_t meta_len = detail::get_u32(is, "model file");
    std::string meta(meta_len, '\0');
    is.read(meta.data(), meta_len);
    require(is.gcount() == static_cast<std::streamsize>(meta_len), Errc::parse_error,
            "unexpected end of model metadata");

    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < meta.size()) {
        std::size_t nl = meta.find('\n', pos);
        if (nl == std::string::npos) nl = meta.size();
        const std::string line = meta.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos, Errc::parse_error, "bad metadata line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const char* key : {"bands", "hidden_dim", "layers", "relu_head", "seed", "noise_level",
                            "batch_size", "num_updates", "learning_rate", "eval_every"}) {
        require(kv.count(key) != 0, Errc::parse_error, std::string("metadata missing key ") + key);
    }

    const auto bands = static_cast<Eigen::Index>(detail::parse_int(kv["bands"], "bands"));
    const auto hidden = static_cast<Eigen::Index>(detail::parse_int(kv["hidden_dim"], "hidden_dim"));
    const auto layers = static_cast<std::size_t>(detail::parse_int(kv["layers"], "layers"));
    require(bands == 11 || bands == 12, Errc::schema_mismatch,
            "model declares unsupported band count " + kv["bands"]);
    require(hidden >= 1 && layers >= 2, Errc::parse_error, "implausible architecture metadata");

    ModelBundle bundle;
    bundle.params.relu_head = detail::parse_int(kv["relu_head"], "relu_head") != 0;
    bundle.config.seed = static_cast<std::uint64_t>(detail::parse_int(kv["seed"], "seed"));
    bundle.config.noise_level = detail::parse_double(kv["noise_level"], "noise_level");
    bundle.config.batch_size = static_cast<int>(detail::parse_int(kv["batch_size"], "batch_size"));
    bundle.config.num_updates = static_cast<long>(detail::parse_int(kv["num_updates"], "num_updates"));
    bundle.config.learning_rate = detail::parse_double(kv["learning_rate"], "learning_rate");
    bundle.config.eval_every = static_cast<long>(detail::parse_int(kv["eval_every"], "eval_every"));

    Normalizer& nz = bundle.normalizer;
    nz.noise_level = bundle.config.noise_level;
    for (Eigen::VectorXd* v : {&nz.mean, &nz.std, &nz.noise_sigma}) {
        v->resize(bands);
        for (Eigen::Index i = 0; i < bands; ++i) (*v)(i) = detail::get_f64(is, "model payload");
    }
    for (std::size_t k = 0; k < layers; ++k) {
        const Eigen::Index in = (k == 0) ? bands : hidden;
        const Eigen::Index out = (k == layers - 1) ? 1 : hidden;
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) w(r, c) = detail::get_f64(is, "model payload");
        }
        Eigen::VectorXd b(out);
        for (Eigen::Index i = 0; i < out; ++i) b(i) = detail::get_f64(is, "model payload");
        bundle.params.weights.push_back(std::move(w));
        bundle.params.biases.push_back(std::move(b));
    }
    char extra;
    is.read(&extra, 1);
    require(is.gcount() == 0, Errc::parse_error, "trailing bytes after model payload");
    return bundle;
}

}  // namespace cot
