#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cot/error.hpp"
#include "cot/features.hpp"
#include "cot/io.hpp"
#include "cot/mlp.hpp"
#include "cot/rng.hpp"
#include "cot/surrogate.hpp"
#include "cot/weak_labels.hpp"

namespace cot {

inline double mae(const std::vector<double>& predictions, const std::vector<double>& targets) {
    require(predictions.size() == targets.size(), Errc::length_mismatch,
            "prediction/target length mismatch: " + std::to_string(predictions.size()) + " vs " +
                std::to_string(targets.size()));
    require(!predictions.empty(), Errc::empty_input, "mae of empty sequences");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) acc += std::abs(predictions[i] - targets[i]);
    return acc / static_cast<double>(predictions.size());
}

inline double mae(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
    require(predictions.size() == targets.size(), Errc::length_mismatch,
            "prediction/target length mismatch");
    require(predictions.size() > 0, Errc::empty_input, "mae of empty sequences");
    return (predictions - targets).cwiseAbs().mean();
}

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
    int k = 0;
    std::vector<long long> counts;  // row-major k*k

    long long& at(int gt, int pred) { return counts[static_cast<std::size_t>(gt) * k + pred]; }
    long long at(int gt, int pred) const { return counts[static_cast<std::size_t>(gt) * k + pred]; }
    long long total() const {
        long long t = 0;
        for (long long c : counts) t += c;
        return t;
    }
};

inline ConfusionMatrix accumulate_confusion(const ClassMask& pred, const ClassMask& gt, int k) {
    require(k >= 2, Errc::out_of_range, "need at least 2 classes");
    require(pred.height == gt.height && pred.width == gt.width, Errc::dimension_mismatch,
            "prediction and ground-truth masks have different shapes");
    ConfusionMatrix cm;
    cm.k = k;
    cm.counts.assign(static_cast<std::size_t>(k) * k, 0);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const int p = pred.labels[i];
        const int g = gt.labels[i];
        require(p < k && g < k, Errc::label_out_of_range,
                "label " + std::to_string(std::max(p, g)) + " with k=" + std::to_string(k));
        cm.at(g, p) += 1;
    }
    return cm;
}

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
};

// Per-class and averaged scores.  All 0/0 ratios are defined as 0 (an absent
// class predicted absent scores 0, not 1).  Macro averages are unweighted;
// micro averages pool pixels and are reported only for completeness.
struct ScoreReport {
    std::vector<ClassScores> per_class;
    ClassScores macro;
    double micro_accuracy = 0.0;  // = micro precision = recall = F1
    double micro_iou = 0.0;
};

namespace detail {

inline double ratio0(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace detail

inline ScoreReport per_class_scores(const ConfusionMatrix& cm) {
    require(cm.k >= 1 && cm.counts.size() == static_cast<std::size_t>(cm.k) * cm.k,
            Errc::bad_shape, "malformed confusion matrix");
    require(cm.total() > 0, Errc::empty_matrix, "confusion matrix has no counts");
    ScoreReport report;
    long long diag = 0;
    long long union_sum = 0;
    for (int c = 0; c < cm.k; ++c) {
        long long tp = cm.at(c, c);
        long long fp = 0;
        long long fn = 0;
        for (int o = 0; o < cm.k; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        ClassScores s;
        s.precision = detail::ratio0(static_cast<double>(tp), static_cast<double>(tp + fp));
        s.recall = detail::ratio0(static_cast<double>(tp), static_cast<double>(tp + fn));
        s.f1 = detail::ratio0(2.0 * s.precision * s.recall, s.precision + s.recall);
        s.iou = detail::ratio0(static_cast<double>(tp), static_cast<double>(tp + fp + fn));
        report.per_class.push_back(s);
        report.macro.precision += s.precision / cm.k;
        report.macro.recall += s.recall / cm.k;
        report.macro.f1 += s.f1 / cm.k;
        report.macro.iou += s.iou / cm.k;
        diag += tp;
        union_sum += tp + fp + fn;
    }
    report.micro_accuracy = detail::ratio0(static_cast<double>(diag), static_cast<double>(cm.total()));
    report.micro_iou = detail::ratio0(static_cast<double>(diag), static_cast<double>(union_sum));
    return report;
}

// One Test-x% style noise sweep.  For each level, every feature j is
// perturbed with zero-mean Gaussian noise of std level * mean|x_j|, the mean
// taken over the evaluated set itself (the harness-side analogue of the
// training-time noise scale).  Level index i uses stream (seed, eval_noise, i)
// so the table is a pure function of (data, model, levels, seed).
struct RegressionReport {
    struct Row {
        double noise_level;
        double mae;
    };
    std::vector<Row> rows;
    double average = 0.0;
};

inline RegressionReport evaluate_regression(const BatchPredictor& predictor,
                                            const Eigen::MatrixXd& features,
                                            const Eigen::VectorXd& targets,
                                            const std::vector<double>& noise_levels,
                                            std::uint64_t seed) {
    require(features.rows() == targets.size(), Errc::length_mismatch,
            "feature/target row count mismatch");
    require(features.rows() > 0, Errc::empty_dataset, "no evaluation samples");
    require(!noise_levels.empty(), Errc::empty_input, "no noise levels requested");
    const Eigen::VectorXd abs_mean = features.cwiseAbs().colwise().mean();

    RegressionReport report;
    for (std::size_t li = 0; li < noise_levels.size(); ++li) {
        const double level = noise_levels[li];
        require(level >= 0.0, Errc::out_of_range, "negative noise level");
        Eigen::MatrixXd x = features;
        if (level > 0.0) {
            Rng rng = Rng::stream(seed, Stream::eval_noise, li);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                for (Eigen::Index j = 0; j < x.cols(); ++j) {
                    x(i, j) += rng.normal() * level * abs_mean(j);
                }
            }
        }
        const double m = mae(predictor(x), targets);
        report.rows.push_back({level, m});
        report.average += m / static_cast<double>(noise_levels.size());
    }
    return report;
}

inline RegressionReport evaluate_regression(const BatchPredictor& predictor, const Dataset& test,
                                            const std::vector<double>& noise_levels,
                                            std::uint64_t seed) {
    return evaluate_regression(predictor, to_feature_matrix(test), to_target_vector(test),
                               noise_levels, seed);
}

// Per-surface-family MAE averaged over the same noise levels; row order
// follows the family enum.
struct FamilyReport {
    struct Row {
        SurfaceFamily family;
        double mae;
        std::size_t count;
    };
    std::vector<Row> rows;
};

inline FamilyReport evaluate_per_family(const BatchPredictor& predictor, const Dataset& test,
                                        const std::vector<double>& noise_levels,
                                        std::uint64_t seed) {
    require(!test.empty(), Errc::empty_dataset, "no evaluation samples");
    FamilyReport report;
    for (int f = 0; f < 5; ++f) {
        Dataset subset;
        subset.cirrus_present = test.cirrus_present;
        for (const LabeledSample& s : test.samples) {
            if (surface_family_of(s.surface_profile_id) == static_cast<SurfaceFamily>(f)) {
                subset.samples.push_back(s);
            }
        }
        FamilyReport::Row row{static_cast<SurfaceFamily>(f), 0.0, subset.size()};
        if (!subset.empty()) {
            row.mae = evaluate_regression(predictor, subset, noise_levels, seed).average;
        }
        report.rows.push_back(row);
    }
    return report;
}

struct ThresholdGrid {
    double lo = 0.0;
    double hi = 50.0;
    double step = 0.25;
};

namespace detail {

inline std::vector<double> grid_values(const ThresholdGrid& grid) {
    require(grid.step > 0.0 && grid.hi >= grid.lo, Errc::out_of_range,
            "threshold grid needs hi >= lo and step > 0");
    std::vector<double> values;
    const auto count = static_cast<long>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9));
    for (long i = 0; i <= count; ++i) values.push_back(grid.lo + static_cast<double>(i) * grid.step);
    return values;
}

inline double macro_f1_from_counts(const long long pred_gt[3][3], int k) {
    double macro = 0.0;
    for (int c = 0; c < k; ++c) {
        long long tp = pred_gt[c][c];
        long long fp = 0;
        long long fn = 0;
        for (int o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += pred_gt[o][c];
            fn += pred_gt[c][o];
        }
        const double precision = ratio0(static_cast<double>(tp), static_cast<double>(tp + fp));
        const double recall = ratio0(static_cast<double>(tp), static_cast<double>(tp + fn));
        macro += ratio0(2.0 * precision * recall, precision + recall) / k;
    }
    return macro;
}

}  // namespace detail

enum class CalibrationObjective {
    macro_f1,
};

struct CalibrationResult {
    ThresholdSet thresholds;
    double objective = 0.0;
};

// Exhaustive (tau_semi, tau_opaque) grid search maximizing 3-class macro F1.
// Ties break toward the lexicographically smaller pair, independent of
// evaluation order.
inline CalibrationResult calibrate_threshold(const std::vector<double>& predictions,
                                             const std::vector<WeakLabel>& labels,
                                             const ThresholdGrid& grid,
                                             CalibrationObjective objective =
                                                 CalibrationObjective::macro_f1) {
    (void)objective;
    require(predictions.size() == labels.size(), Errc::length_mismatch,
            "prediction/label length mismatch");
    require(!predictions.empty(), Errc::empty_validation, "no validation pixels");
    const std::vector<double> taus = detail::grid_values(grid);
    require(taus.size() >= 2, Errc::out_of_range,
            "threshold grid must contain at least two values");

    // below[l][i] = number of label-l samples with prediction < taus[i];
    // turns each candidate pair into O(1) confusion-matrix assembly.
    std::vector<std::vector<long long>> below(3, std::vector<long long>(taus.size() + 1, 0));
    std::array<long long, 3> label_total{0, 0, 0};
    for (std::size_t s = 0; s < predictions.size(); ++s) {
        const auto l = static_cast<std::size_t>(labels[s]);
        label_total[l] += 1;
        const auto it = std::upper_bound(taus.begin(), taus.end(), predictions[s]);
        // predictions[s] < taus[i] for all i >= pos
        const auto pos = static_cast<std::size_t>(it - taus.begin());
        for (std::size_t i = pos; i < taus.size(); ++i) below[l][i] += 1;
    }
    // Handle boundary equality: prediction exactly equal to a threshold goes
    // to the cloudier class, i.e. counts as NOT below.  upper_bound already
    // gives first-tau-strictly-greater, so below[l][i] counts pred < taus[i].

    CalibrationResult best;
    best.objective = -1.0;
    for (std::size_t a = 0; a < taus.size(); ++a) {
        for (std::size_t b = a + 1; b < taus.size(); ++b) {
            long long cm[3][3];  // [gt][pred]
            for (int l = 0; l < 3; ++l) {
                const long long n_clear = below[l][a];
                const long long n_semi = below[l][b] - below[l][a];
                const long long n_opaque = label_total[static_cast<std::size_t>(l)] - below[l][b];
                cm[l][0] = n_clear;
                cm[l][1] = n_semi;
                cm[l][2] = n_opaque;
            }
            const double f1 = detail::macro_f1_from_counts(cm, 3);
            if (f1 > best.objective) {
                best.objective = f1;
                best.thresholds.tau_semi = taus[a];
                best.thresholds.tau_opaque = taus[b];
            }
        }
    }
    return best;
}

// Binary cloudy-vs-clear threshold search (prediction >= tau means cloudy).
// Tie order: higher macro F1, then fewer cloudy predictions, then the larger
// threshold — so an all-clear validation set yields the largest grid value.
inline CalibrationResult calibrate_threshold_binary(const std::vector<double>& predictions,
                                                    const std::vector<bool>& cloudy,
                                                    const ThresholdGrid& grid,
                                                    CalibrationObjective objective =
                                                        CalibrationObjective::macro_f1) {
    (void)objective;
    require(predictions.size() == cloudy.size(), Errc::length_mismatch,
            "prediction/label length mismatch");
    require(!predictions.empty(), Errc::empty_validation, "no validation pixels");
    const std::vector<double> taus = detail::grid_values(grid);

    std::vector<std::vector<long long>> below(2, std::vector<long long>(taus.size(), 0));
    std::array<long long, 2> label_total{0, 0};
    for (std::size_t s = 0; s < predictions.size(); ++s) {
        const std::size_t l = cloudy[s] ? 1 : 0;
        label_total[l] += 1;
        const auto it = std::upper_bound(taus.begin(), taus.end(), predictions[s]);
        const auto pos = static_cast<std::size_t>(it - taus.begin());
        for (std::size_t i = pos; i < taus.size(); ++i) below[l][i] += 1;
    }

    CalibrationResult best;
    best.objective = -1.0;
    long long best_cloudy_count = 0;
    bool first = true;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        long long cm[3][3] = {};  // [gt][pred], classes {0=clear, 1=cloudy}
        cm[0][0] = below[0][i];
        cm[0][1] = label_total[0] - below[0][i];
        cm[1][0] = below[1][i];
        cm[1][1] = label_total[1] - below[1][i];
        const double f1 = detail::macro_f1_from_counts(cm, 2);
        const long long cloudy_count = cm[0][1] + cm[1][1];
        const bool better = first || f1 > best.objective ||
                            (f1 == best.objective &&
                             (cloudy_count < best_cloudy_count ||
                              (cloudy_count == best_cloudy_count && taus[i] > best.thresholds.tau_binary)));
        if (better) {
            first = false;
            best.objective = f1;
            best.thresholds.tau_binary = taus[i];
            best_cloudy_count = cloudy_count;
        }
    }
    return best;
}

namespace detail {

inline std::vector<double> weak_predictions(const BatchPredictor& predictor,
                                            const std::vector<WeakSample>& pixels) {
    require(!pixels.empty(), Errc::empty_validation, "no validation pixels");
    const auto dim = static_cast<Eigen::Index>(pixels.front().bands.size());
    Eigen::MatrixXd x(pixels.size(), dim);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        require(pixels[i].bands.size() == static_cast<std::size_t>(dim), Errc::dimension_mismatch,
                "validation pixels disagree on band count");
        for (Eigen::Index j = 0; j < dim; ++j) {
            x(static_cast<Eigen::Index>(i), j) = pixels[i].bands[static_cast<std::size_t>(j)];
        }
    }
    const Eigen::VectorXd pred = predictor(x);
    return {pred.data(), pred.data() + pred.size()};
}

}  // namespace detail

inline CalibrationResult calibrate_threshold(const BatchPredictor& predictor,
                                             const std::vector<WeakSample>& pixels,
                                             const ThresholdGrid& grid) {
    const std::vector<double> pred = detail::weak_predictions(predictor, pixels);
    std::vector<WeakLabel> labels;
    labels.reserve(pixels.size());
    for (const WeakSample& s : pixels) labels.push_back(s.label);
    return calibrate_threshold(pred, labels, grid);
}

// Binary wrapper: any non-clear weak label counts as cloudy.
inline CalibrationResult calibrate_threshold_binary(const BatchPredictor& predictor,
                                                    const std::vector<WeakSample>& pixels,
                                                    const ThresholdGrid& grid) {
    const std::vector<double> pred = detail::weak_predictions(predictor, pixels);
    std::vector<bool> cloudy;
    cloudy.reserve(pixels.size());
    for (const WeakSample& s : pixels) cloudy.push_back(s.label != WeakLabel::clear);
    return calibrate_threshold_binary(pred, cloudy, grid);
}

}  // namespace cot
