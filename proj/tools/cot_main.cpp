// Command-line front end: generate surrogate data, train/fine-tune MLP COT
// regressors, evaluate under test-time noise, calibrate thresholds, run
// raster inference, and benchmark.  Every command is deterministic in
// (--seed, inputs); see the library headers for the stream layout.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cot/cot.hpp"

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out_dir;
    bool quiet = false;
};

// Relative output paths land under --out-dir (if given); parents are created.
std::string out_path(const GlobalOpts& g, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (!g.out_dir.empty() && p.is_relative()) p = fs::path(g.out_dir) / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p.string();
}

std::map<std::string, std::string> rename_map(const std::vector<std::string>& pairs) {
    std::map<std::string, std::string> m;
    for (const std::string& p : pairs) {
        const std::size_t eq = p.find('=');
        cot::require(eq != std::string::npos && eq > 0 && eq + 1 < p.size(), cot::Errc::bad_config,
                     "--rename expects FROM=TO, got '" + p + "'");
        m[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return m;
}

// Ensemble file names: model.bin -> model_0.bin, model_1.bin, ...
std::string member_path(const std::string& path, int k, int count) {
    if (count == 1) return path;
    const std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path();
    out /= p.stem().string() + "_" + std::to_string(k) + p.extension().string();
    return out.string();
}

const char* cloud_type_name(int id) {
    switch (static_cast<cot::CloudType>(id)) {
        case cot::CloudType::clear: return "clear";
        case cot::CloudType::water: return "water";
        case cot::CloudType::ice: return "ice";
        case cot::CloudType::mixed: return "mixed";
    }
    return "?";
}

std::string fmt(double v) { return cot::detail::format_double(v); }

// Loads one or more bundles and exposes them through the uniform predictor
// interface.  The bundles must outlive the returned predictor.
struct LoadedModels {
    cot::Ensemble ensemble;

    explicit LoadedModels(const std::vector<std::string>& paths) {
        for (const std::string& p : paths) ensemble.members.push_back(cot::load_model(p));
        cot::check_ensemble(ensemble);
    }
    bool single() const { return ensemble.members.size() == 1; }
    const cot::ModelBundle& front() const { return ensemble.members.front(); }
    cot::BatchPredictor predictor() const {
        return single() ? cot::batch_predictor(ensemble.members.front())
                        : cot::batch_predictor(ensemble);
    }
    cot::CotMap predict(const cot::RasterImage& img) const {
        return single() ? cot::predict_raster(ensemble.members.front(), img)
                        : cot::predict_raster(ensemble, img);
    }
};

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOpts {
    std::size_t n = 0;
    std::string out;
    double cloudy_zero_fraction = 0.0;
};

void cmd_generate(const GlobalOpts& g, const GenerateOpts& o) {
    const cot::Dataset d = cot::generate_dataset(o.n, g.seed, {o.cloudy_zero_fraction});
    const std::string path = out_path(g, o.out);
    cot::save_dataset_csv(d, path);
    if (g.quiet) return;

    std::map<int, std::size_t> by_part;
    std::map<int, std::size_t> by_family;
    for (const cot::LabeledSample& s : d.samples) {
        ++by_part[s.cloud_type_id];
        ++by_family[static_cast<int>(cot::surface_family_of(s.surface_profile_id))];
    }
    std::cout << "wrote " << d.size() << " samples to " << path << "\n";
    for (const auto& [part, count] : by_part) {
        std::cout << "  part " << cloud_type_name(part) << ": " << count << "\n";
    }
    for (const auto& [fam, count] : by_family) {
        std::cout << "  surface " << cot::surface_family_name(static_cast<cot::SurfaceFamily>(fam))
                  << ": " << count << "\n";
    }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string data;
    std::string out;
    std::string history;
    std::vector<std::string> rename;
    int ensemble = 1;
    int hidden = 64;
    int layers = 5;
    cot::TrainConfig cfg;  // batch size, updates, lr, noise level, eval cadence
    cot::SplitRatios ratios;
};

void write_history(const std::string& path, const cot::TrainHistory& h) {
    std::ofstream os(path);
    cot::require(os.good(), cot::Errc::io_error, "cannot open '" + path + "' for writing");
    os << "step,train_loss,val_mae\n";
    os << "0,," << fmt(h.initial_val_mae) << "\n";
    for (const auto& e : h.entries) {
        os << e.step << "," << fmt(e.train_loss) << "," << fmt(e.val_mae) << "\n";
    }
    os << "# best_step=" << h.best_step << "\n";
    os << "# best_val_mae=" << fmt(h.best_val_mae) << "\n";
    cot::require(os.good(), cot::Errc::io_error, "write to '" + path + "' failed");
}

void cmd_train(const GlobalOpts& g, const TrainOpts& o) {
    const cot::Dataset full = cot::load_dataset_csv(o.data, rename_map(o.rename));
    const cot::Splits splits = cot::split_dataset(full, o.ratios, g.seed);
    const cot::Normalizer nz = cot::fit_normalizer(splits.train, o.cfg.noise_level);
    cot::require(o.ensemble >= 1, cot::Errc::bad_count, "--ensemble must be at least 1");

    for (int k = 0; k < o.ensemble; ++k) {
        cot::TrainConfig cfg = o.cfg;
        cfg.seed = g.seed + static_cast<std::uint64_t>(k);
        cot::TrainHistory history;
        cot::ModelBundle bundle;
        bundle.params = cot::train(splits.train, splits.val, cfg, nz, &history, o.hidden, o.layers);
        bundle.normalizer = nz;
        bundle.config = cfg;

        const std::string path = out_path(g, member_path(o.out, k, o.ensemble));
        cot::save_model(path, bundle);
        if (!o.history.empty()) {
            write_history(out_path(g, member_path(o.history, k, o.ensemble)), history);
        }
        if (!g.quiet) {
            std::cout << "member " << k << ": " << path << "  val MAE " << fmt(history.best_val_mae)
                      << " (best, step " << history.best_step << ")\n";
        }
    }
}

// ---------------------------------------------------------------------------
// finetune
// ---------------------------------------------------------------------------

struct FinetuneOpts {
    std::string model;
    std::string data;
    std::string out;
    std::vector<std::string> rename;
    cot::ThresholdSet thresholds;
    cot::TrainConfig cfg = cot::finetune_defaults();
};

void cmd_finetune(const GlobalOpts& g, const FinetuneOpts& o) {
    const cot::ModelBundle model = cot::load_model(o.model);
    const cot::WeakDataset weak = cot::load_weak_csv(o.data, rename_map(o.rename));
    cot::TrainConfig cfg = o.cfg;
    cfg.seed = g.seed;
    const cot::ModelBundle tuned = cot::finetune(model, weak.samples, o.thresholds, cfg);
    const std::string path = out_path(g, o.out);
    cot::save_model(path, tuned);
    if (!g.quiet) {
        std::cout << "fine-tuned on " << weak.samples.size() << " weak pixels -> " << path << "\n";
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
    std::vector<std::string> models;
    std::string data;
    std::string out;
    std::string split = "all";
    std::vector<std::string> rename;
    std::vector<double> levels;
    bool per_family = false;
    cot::SplitRatios ratios;
};

void cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
    const LoadedModels models(o.models);
    const cot::BatchPredictor predictor = models.predictor();

    cot::Dataset data = cot::load_dataset_csv(o.data, rename_map(o.rename));
    if (o.split != "all") {
        cot::Splits splits = cot::split_dataset(data, o.ratios, g.seed);
        if (o.split == "train") {
            data = std::move(splits.train);
        } else if (o.split == "val") {
            data = std::move(splits.val);
        } else if (o.split == "test") {
            data = std::move(splits.test);
        } else {
            cot::fail(cot::Errc::bad_config, "--split must be all, train, val or test");
        }
    }

    std::vector<double> levels = o.levels;
    if (levels.empty()) levels = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    const cot::RegressionReport report = cot::evaluate_regression(predictor, data, levels, g.seed);

    std::vector<std::pair<std::string, double>> rows;
    for (const auto& row : report.rows) {
        rows.emplace_back("test_" + fmt(row.noise_level * 100.0) + "%", row.mae);
    }
    rows.emplace_back("average", report.average);
    if (o.per_family) {
        const cot::FamilyReport fam = cot::evaluate_per_family(predictor, data, levels, g.seed);
        for (const auto& row : fam.rows) {
            rows.emplace_back(std::string("family_") + cot::surface_family_name(row.family),
                              row.mae);
        }
    }

    if (!o.out.empty()) {
        const std::string path = out_path(g, o.out);
        std::ofstream os(path);
        cot::require(os.good(), cot::Errc::io_error, "cannot open '" + path + "' for writing");
        os << "row,mae\n";
        for (const auto& [name, value] : rows) os << name << "," << fmt(value) << "\n";
        cot::require(os.good(), cot::Errc::io_error, "write to '" + path + "' failed");
    }
    if (!g.quiet) {
        std::cout << "evaluated " << data.size() << " samples\n";
        for (const auto& [name, value] : rows) std::cout << "  " << name << ": " << fmt(value) << "\n";
    }
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateOpts {
    std::vector<std::string> models;
    std::string data;
    std::string out;
    std::vector<std::string> rename;
    cot::ThresholdGrid grid;
    bool binary = false;
};

void cmd_calibrate(const GlobalOpts& g, const CalibrateOpts& o) {
    const LoadedModels models(o.models);
    const cot::BatchPredictor predictor = models.predictor();
    const cot::WeakDataset weak = cot::load_weak_csv(o.data, rename_map(o.rename));

    const cot::CalibrationResult three = cot::calibrate_threshold(predictor, weak.samples, o.grid);
    std::vector<std::pair<std::string, double>> rows = {
        {"tau_semi", three.thresholds.tau_semi},
        {"tau_opaque", three.thresholds.tau_opaque},
        {"macro_f1", three.objective},
    };
    if (o.binary) {
        const cot::CalibrationResult two =
            cot::calibrate_threshold_binary(predictor, weak.samples, o.grid);
        rows.emplace_back("tau_binary", two.thresholds.tau_binary);
        rows.emplace_back("binary_f1", two.objective);
    }

    if (!o.out.empty()) {
        const std::string path = out_path(g, o.out);
        std::ofstream os(path);
        cot::require(os.good(), cot::Errc::io_error, "cannot open '" + path + "' for writing");
        for (const auto& [name, value] : rows) os << name << " = " << fmt(value) << "\n";
        cot::require(os.good(), cot::Errc::io_error, "write to '" + path + "' failed");
    }
    if (!g.quiet) {
        for (const auto& [name, value] : rows) std::cout << name << " = " << fmt(value) << "\n";
    }
}

// ---------------------------------------------------------------------------
// infer
// ---------------------------------------------------------------------------

struct InferOpts {
    std::vector<std::string> models;
    std::string input;
    std::string out_prefix;
    int smooth_m = 2;
    bool no_smooth = false;
    cot::ThresholdSet thresholds;
};

void cmd_infer(const GlobalOpts& g, const InferOpts& o) {
    cot::validate_thresholds(o.thresholds);
    const LoadedModels models(o.models);
    const cot::RasterImage img = cot::load_raster(o.input);

    cot::CotMap map = models.predict(img);
    if (!o.no_smooth) map = cot::smooth_cot_map(map, o.smooth_m);
    const cot::ClassMask mask = cot::classify_cot(map, o.thresholds);
    const cot::ImageVerdict verdict = cot::image_level_label(map, o.thresholds.tau_binary);

    const std::string prefix = out_path(g, o.out_prefix);
    cot::save_cot_map(map, prefix + ".cot");
    cot::write_class_mask(mask, prefix + ".mask.pgm");
    if (!g.quiet) {
        std::cout << "wrote " << prefix << ".cot and " << prefix << ".mask.pgm\n";
    }
    std::cout << "verdict = " << cot::verdict_name(verdict) << "\n";
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkOpts {
    std::vector<std::string> models;
    int height = 128;
    int width = 128;
    int runs = 10;
    int warmup = 2;
};

std::string hardware_note() {
    std::string model = "unknown CPU";
    std::ifstream is("/proc/cpuinfo");
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("model name", 0) == 0) {
            const std::size_t colon = line.find(':');
            if (colon != std::string::npos) model = cot::detail::trim(line.substr(colon + 1));
            break;
        }
    }
    return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " hardware threads)";
}

void cmd_benchmark(const GlobalOpts& g, const BenchmarkOpts& o) {
    cot::require(o.runs >= 1 && o.warmup >= 0 && o.height >= 1 && o.width >= 1,
                 cot::Errc::out_of_range, "benchmark dimensions and run counts must be positive");
    const LoadedModels models(o.models);

    cot::RasterImage img;
    img.height = o.height;
    img.width = o.width;
    img.channels = static_cast<int>(models.front().params.input_dim());
    img.data.resize(static_cast<std::size_t>(o.height) * static_cast<std::size_t>(o.width) *
                    static_cast<std::size_t>(img.channels));
    cot::Rng rng = cot::Rng::stream(g.seed, cot::Stream::raster, 0);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());

    for (int i = 0; i < o.warmup; ++i) (void)models.predict(img);
    std::vector<double> seconds;
    for (int i = 0; i < o.runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)models.predict(img);
        const auto t1 = std::chrono::steady_clock::now();
        seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(seconds.begin(), seconds.end());
    const std::size_t n = seconds.size();
    const double median =
        n % 2 == 1 ? seconds[n / 2] : 0.5 * (seconds[n / 2 - 1] + seconds[n / 2]);

    std::cout << "image = " << o.height << "x" << o.width << "x" << img.channels << "\n";
    std::cout << "models = " << models.ensemble.members.size() << "\n";
    std::cout << "timed_runs = " << o.runs << " (after " << o.warmup << " warm-up)\n";
    std::cout << "median_seconds_per_image = " << fmt(median) << "\n";
    std::cout << "hardware = " << hardware_note() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cloud optical thickness toolkit: synthesize training data, train MLP "
                 "regressors, and turn COT predictions into cloud masks."};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file with one [section] per subcommand");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "root seed; every random stream derives from it")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory prefixed to relative output paths");
    app.add_flag("--quiet", g.quiet, "suppress informational output");

    auto configure = [](CLI::App* sub) {
        sub->fallthrough();
        sub->configurable();
        return sub;
    };

    GenerateOpts gen;
    CLI::App* sub = configure(app.add_subcommand("generate", "synthesize a labeled dataset CSV"));
    sub->add_option("--n", gen.n, "sample count (multiple of 4)")->required();
    sub->add_option("--out", gen.out, "output CSV path")->required();
    sub->add_option("--cloudy-zero-fraction", gen.cloudy_zero_fraction,
                    "fraction of cloudy samples rendered cloud-free (label kept)")
        ->capture_default_str();
    sub->callback([&] { cmd_generate(g, gen); });

    TrainOpts tr;
    sub = configure(app.add_subcommand("train", "train one model or an ensemble"));
    sub->add_option("--data", tr.data, "dataset CSV")->required();
    sub->add_option("--out", tr.out, "output model path (member index appended for ensembles)")
        ->required();
    sub->add_option("--ensemble", tr.ensemble, "member count; member k uses seed+k")
        ->capture_default_str();
    sub->add_option("--updates", tr.cfg.num_updates, "gradient updates")->capture_default_str();
    sub->add_option("--batch-size", tr.cfg.batch_size, "minibatch size")->capture_default_str();
    sub->add_option("--lr", tr.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--noise-level", tr.cfg.noise_level, "training input noise level (0..0.2)")
        ->capture_default_str();
    sub->add_option("--eval-every", tr.cfg.eval_every, "history cadence in updates")
        ->capture_default_str();
    sub->add_option("--hidden", tr.hidden, "hidden width")->capture_default_str();
    sub->add_option("--layers", tr.layers, "layer count (>= 2)")->capture_default_str();
    sub->add_option("--history", tr.history, "write per-member training history CSV here");
    sub->add_option("--train-frac", tr.ratios.train, "train split fraction")->capture_default_str();
    sub->add_option("--val-frac", tr.ratios.val, "validation split fraction")->capture_default_str();
    sub->add_option("--test-frac", tr.ratios.test, "test split fraction")->capture_default_str();
    sub->add_option("--rename", tr.rename, "CSV column rename FROM=TO (repeatable)");
    sub->callback([&] { cmd_train(g, tr); });

    FinetuneOpts ft;
    sub = configure(app.add_subcommand("finetune", "fine-tune a model on weak pixel labels"));
    sub->add_option("--model", ft.model, "pretrained model bundle")->required();
    sub->add_option("--data", ft.data, "weak-label pixel CSV")->required();
    sub->add_option("--out", ft.out, "output model path")->required();
    sub->add_option("--tau-semi", ft.thresholds.tau_semi, "semi-transparent threshold")
        ->capture_default_str();
    sub->add_option("--tau-opaque", ft.thresholds.tau_opaque, "opaque threshold")
        ->capture_default_str();
    sub->add_option("--updates", ft.cfg.num_updates, "gradient updates")->capture_default_str();
    sub->add_option("--batch-size", ft.cfg.batch_size, "minibatch size")->capture_default_str();
    sub->add_option("--lr", ft.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--noise-level", ft.cfg.noise_level,
                    "input noise level (needs a noise-trained model)")
        ->capture_default_str();
    sub->add_option("--rename", ft.rename, "CSV column rename FROM=TO (repeatable)");
    sub->callback([&] { cmd_finetune(g, ft); });

    EvalOpts ev;
    sub = configure(app.add_subcommand("eval", "report MAE under test-time noise"));
    sub->add_option("--model", ev.models, "model bundle(s); several form an ensemble")->required();
    sub->add_option("--data", ev.data, "dataset CSV")->required();
    sub->add_option("--levels", ev.levels, "noise levels (default 0 0.01 ... 0.05)");
    sub->add_option("--split", ev.split, "evaluate on: all, train, val or test")
        ->capture_default_str();
    sub->add_option("--train-frac", ev.ratios.train, "train split fraction")->capture_default_str();
    sub->add_option("--val-frac", ev.ratios.val, "validation split fraction")->capture_default_str();
    sub->add_option("--test-frac", ev.ratios.test, "test split fraction")->capture_default_str();
    sub->add_flag("--per-family", ev.per_family, "append per-surface-family MAE rows");
    sub->add_option("--out", ev.out, "also write the report CSV here");
    sub->add_option("--rename", ev.rename, "CSV column rename FROM=TO (repeatable)");
    sub->callback([&] { cmd_eval(g, ev); });

    CalibrateOpts cal;
    sub = configure(app.add_subcommand("calibrate", "grid-search COT thresholds on weak labels"));
    sub->add_option("--model", cal.models, "model bundle(s); several form an ensemble")->required();
    sub->add_option("--data", cal.data, "weak-label pixel CSV")->required();
    sub->add_option("--out", cal.out, "write thresholds + objective here");
    sub->add_option("--grid-lo", cal.grid.lo, "grid start")->capture_default_str();
    sub->add_option("--grid-hi", cal.grid.hi, "grid end")->capture_default_str();
    sub->add_option("--grid-step", cal.grid.step, "grid step")->capture_default_str();
    sub->add_flag("--binary", cal.binary, "also calibrate the binary cloudy/clear threshold");
    sub->add_option("--rename", cal.rename, "CSV column rename FROM=TO (repeatable)");
    sub->callback([&] { cmd_calibrate(g, cal); });

    InferOpts in;
    sub = configure(app.add_subcommand("infer", "raster -> COT map, class mask and verdict"));
    sub->add_option("--model", in.models, "model bundle(s); several form an ensemble")->required();
    sub->add_option("--input", in.input, "input raster (COTRASTER format)")->required();
    sub->add_option("--out-prefix", in.out_prefix, "writes <prefix>.cot and <prefix>.mask.pgm")
        ->required();
    sub->add_option("--m", in.smooth_m, "smoothing window (1 = none)")->capture_default_str();
    sub->add_flag("--no-smooth", in.no_smooth, "skip smoothing entirely");
    sub->add_option("--tau-semi", in.thresholds.tau_semi, "semi-transparent threshold")
        ->capture_default_str();
    sub->add_option("--tau-opaque", in.thresholds.tau_opaque, "opaque threshold")
        ->capture_default_str();
    sub->add_option("--tau-binary", in.thresholds.tau_binary, "image-level cloudy threshold")
        ->capture_default_str();
    sub->callback([&] { cmd_infer(g, in); });

    BenchmarkOpts bm;
    sub = configure(app.add_subcommand("benchmark", "time raster inference"));
    sub->add_option("--model", bm.models, "model bundle(s); several form an ensemble")->required();
    sub->add_option("--height", bm.height, "raster height")->capture_default_str();
    sub->add_option("--width", bm.width, "raster width")->capture_default_str();
    sub->add_option("--runs", bm.runs, "timed runs (median reported)")->capture_default_str();
    sub->add_option("--warmup", bm.warmup, "untimed warm-up runs")->capture_default_str();
    sub->callback([&] { cmd_benchmark(g, bm); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const cot::Error& e) {
        std::cerr << e.what() << "\n";
        return cot::errc_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
