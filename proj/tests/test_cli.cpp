// End-to-end tests of the `cot` binary: exit-code contract, determinism of
// every artifact-producing command, config-file handling and output layout.
// COT_CLI_PATH is injected by the build.
#include <catch2/catch_amalgamated.hpp>
#include <sys/wait.h>
#include <unistd.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cot/cot.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

struct Workspace {
    fs::path root;
    bool ready = false;
};

Workspace& ws() {
    static Workspace w = [] {
        Workspace v;
        v.root = fs::temp_directory_path() / ("cot_cli_" + std::to_string(::getpid()));
        fs::create_directories(v.root / "logs");
        return v;
    }();
    return w;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
    REQUIRE(os.good());
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file = ws().root / "logs" / ("out_" + std::to_string(counter) + ".txt");
    const fs::path err_file = ws().root / "logs" / ("err_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = "cd '" + ws().root.string() + "' && '" + COT_CLI_PATH + "' " + args +
                            " >'" + out_file.string() + "' 2>'" + err_file.string() + "'";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = raw == -1 ? -1 : WEXITSTATUS(raw);
    r.out = read_bytes(out_file);
    r.err = read_bytes(err_file);
    return r;
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_bytes(a) == read_bytes(b); }

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

// Fixed hyperparameters small enough that a full training run is instant.
const std::string kTrainArgs = "--updates 300 --hidden 8 --layers 3 --eval-every 100";

}  // namespace

TEST_CASE("fixture: a shared workspace with data, model, weak labels and a raster") {
    Workspace& w = ws();

    RunResult r = run_cli("--seed 11 generate --n 240 --out data.csv --quiet");
    INFO(r.err);
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(w.root / "data.csv"));

    r = run_cli("--seed 11 train --data data.csv --out model.bin " + kTrainArgs + " --quiet");
    INFO(r.err);
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(w.root / "model.bin"));

    // Weak pixel labels derived from the generated samples by thresholding
    // the true COT at the default class boundaries.
    const cot::Dataset d = cot::load_dataset_csv((w.root / "data.csv").string());
    cot::WeakDataset weak;
    for (const cot::LabeledSample& s : d.samples) {
        cot::WeakSample p;
        p.bands = s.bands;
        p.label = s.cot >= 1.25 ? cot::WeakLabel::opaque
                                : (s.cot >= 0.75 ? cot::WeakLabel::semi : cot::WeakLabel::clear);
        weak.samples.push_back(std::move(p));
    }
    cot::save_weak_csv(weak, (w.root / "weak.csv").string());

    // A 10x12 scene: clear left half, COT-8 right half.
    std::vector<double> cots(10 * 12, 0.0);
    for (int i = 0; i < 10; ++i) {
        for (int j = 6; j < 12; ++j) cots[static_cast<std::size_t>(i) * 12 + j] = 8.0;
    }
    const std::vector<double> field = cot::render_cot_field(10, 12, cots, 5);
    cot::RasterImage img;
    img.height = 10;
    img.width = 12;
    img.channels = 12;
    img.data.assign(field.begin(), field.end());
    cot::save_raster(img, (w.root / "scene.raster").string());

    w.ready = true;
}

TEST_CASE("exit codes: 0 success, 2 usage or bad input, 1 runtime failure") {
    REQUIRE(ws().ready);

    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("generate --help").code == 0);

    CHECK(run_cli("").code == 2);            // a subcommand is required
    CHECK(run_cli("frobnicate").code == 2);  // unknown subcommand
    CHECK(run_cli("train --out m.bin").code == 2);  // missing required --data

    RunResult r = run_cli("generate --n 6 --out bad.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("divisible by 4") != std::string::npos);
    CHECK(!fs::exists(ws().root / "bad.csv"));

    r = run_cli("train --data no_such_file.csv --out m.bin");
    CHECK(r.code == 1);  // I/O failure at runtime
    CHECK(r.err.find("no_such_file.csv") != std::string::npos);

    CHECK(run_cli("eval --model model.bin --data no_such_file.csv").code == 1);
    CHECK(run_cli("eval --model no_such_model.bin --data data.csv").code == 1);

    // Invalid threshold order is a configuration error.
    r = run_cli("infer --model model.bin --input scene.raster --out-prefix x "
                "--tau-semi 2 --tau-opaque 1");
    CHECK(r.code == 2);

    // A weak-label file with no data rows cannot calibrate anything.
    write_text(ws().root / "empty_weak.csv",
               "b02,b03,b04,b05,b06,b07,b08,b8a,b09,b10,b11,b12,label\n");
    r = run_cli("calibrate --model model.bin --data empty_weak.csv");
    CHECK(r.code == 2);

    // A model file with the wrong magic is rejected as bad input.
    write_text(ws().root / "junk.bin", "not a model at all");
    CHECK(run_cli("eval --model junk.bin --data data.csv").code == 2);

    CHECK(run_cli("eval --model model.bin --data data.csv --split bogus --quiet").code == 2);
    CHECK(run_cli("train --data data.csv --out m.bin --rename nonsense").code == 2);
}

TEST_CASE("generate: same seed gives identical bytes, different seed differs") {
    REQUIRE(ws().ready);
    REQUIRE(run_cli("--seed 11 generate --n 240 --out data_again.csv --quiet").code == 0);
    CHECK(same_bytes(ws().root / "data.csv", ws().root / "data_again.csv"));

    REQUIRE(run_cli("--seed 12 generate --n 240 --out data_seed12.csv --quiet").code == 0);
    CHECK(!same_bytes(ws().root / "data.csv", ws().root / "data_seed12.csv"));

    const RunResult r = run_cli("--seed 3 generate --n 40 --out composition.csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("wrote 40 samples") != std::string::npos);
    CHECK(r.out.find("part clear: 10") != std::string::npos);
    CHECK(r.out.find("part water: 10") != std::string::npos);
    CHECK(r.out.find("part ice: 10") != std::string::npos);
    CHECK(r.out.find("part mixed: 10") != std::string::npos);
    CHECK(r.out.find("surface ") != std::string::npos);
}

TEST_CASE("train: reproducible bytes; ensembles append member indices") {
    REQUIRE(ws().ready);
    REQUIRE(run_cli("--seed 11 train --data data.csv --out model_again.bin " + kTrainArgs +
                    " --quiet")
                .code == 0);
    CHECK(same_bytes(ws().root / "model.bin", ws().root / "model_again.bin"));

    REQUIRE(run_cli("--seed 12 train --data data.csv --out model_seed12.bin " + kTrainArgs +
                    " --quiet")
                .code == 0);
    CHECK(!same_bytes(ws().root / "model.bin", ws().root / "model_seed12.bin"));

    // Ensemble member k trains with seed+k on the same split and normalizer,
    // so member 0 must reproduce the single-model run exactly.
    REQUIRE(run_cli("--seed 11 train --data data.csv --out ens.bin --ensemble 2 " + kTrainArgs +
                    " --quiet")
                .code == 0);
    REQUIRE(fs::exists(ws().root / "ens_0.bin"));
    REQUIRE(fs::exists(ws().root / "ens_1.bin"));
    CHECK(same_bytes(ws().root / "model.bin", ws().root / "ens_0.bin"));
    CHECK(!same_bytes(ws().root / "ens_0.bin", ws().root / "ens_1.bin"));

    const RunResult r = run_cli("--seed 11 train --data data.csv --out hist_model.bin " +
                                kTrainArgs + " --history history.csv --quiet");
    REQUIRE(r.code == 0);
    const std::string hist = read_bytes(ws().root / "history.csv");
    CHECK(hist.rfind("step,train_loss,val_mae\n0,,", 0) == 0);
    CHECK(hist.find("\n100,") != std::string::npos);
    CHECK(hist.find("\n300,") != std::string::npos);
    CHECK(hist.find("# best_step=") != std::string::npos);
    CHECK(hist.find("# best_val_mae=") != std::string::npos);
}

TEST_CASE("eval: documented rows, determinism and split selection") {
    REQUIRE(ws().ready);
    const std::string base = "--seed 11 eval --model model.bin --data data.csv --quiet";
    REQUIRE(run_cli(base + " --out report.csv").code == 0);
    const std::string report = read_bytes(ws().root / "report.csv");
    CHECK(report.rfind("row,mae\n", 0) == 0);
    for (const char* row : {"test_0%", "test_1%", "test_2%", "test_3%", "test_4%", "test_5%",
                            "average"}) {
        CHECK(report.find(std::string("\n") + row + ",") != std::string::npos);
    }
    CHECK(line_count(report) == 8);

    REQUIRE(run_cli(base + " --out report_again.csv").code == 0);
    CHECK(same_bytes(ws().root / "report.csv", ws().root / "report_again.csv"));

    REQUIRE(run_cli(base + " --out report_family.csv --per-family").code == 0);
    const std::string fam = read_bytes(ws().root / "report_family.csv");
    CHECK(line_count(fam) == 13);
    for (const char* row : {"family_vegetation", "family_rock", "family_npv", "family_water",
                            "family_soil"}) {
        CHECK(fam.find(std::string("\n") + row + ",") != std::string::npos);
    }

    REQUIRE(run_cli(base + " --out report_custom.csv --levels 0 0.02").code == 0);
    const std::string custom = read_bytes(ws().root / "report_custom.csv");
    CHECK(line_count(custom) == 4);
    CHECK(custom.find("\ntest_2%,") != std::string::npos);

    REQUIRE(run_cli(base + " --out report_test_split.csv --split test").code == 0);
    CHECK(!same_bytes(ws().root / "report.csv", ws().root / "report_test_split.csv"));

    const RunResult loud = run_cli("--seed 11 eval --model model.bin --data data.csv");
    REQUIRE(loud.code == 0);
    CHECK(loud.out.find("evaluated 240 samples") != std::string::npos);
    CHECK(loud.out.find("average: ") != std::string::npos);

    // Two bundles form an ensemble.
    CHECK(run_cli("--seed 11 eval --model ens_0.bin --model ens_1.bin --data data.csv --quiet")
              .code == 0);
}

TEST_CASE("eval: --rename maps nonstandard column names onto the schema") {
    REQUIRE(ws().ready);
    std::string csv = read_bytes(ws().root / "data.csv");
    const std::size_t pos = csv.find(",cot");
    REQUIRE(pos != std::string::npos);
    csv.replace(pos, 4, ",tau");
    write_text(ws().root / "renamed.csv", csv);

    CHECK(run_cli("eval --model model.bin --data renamed.csv --quiet").code == 2);
    CHECK(run_cli("eval --model model.bin --data renamed.csv --rename tau=cot --quiet").code == 0);
}

TEST_CASE("calibrate: key = value report on stdout and on disk") {
    REQUIRE(ws().ready);
    const std::string base =
        "calibrate --model model.bin --data weak.csv --grid-hi 5 --grid-step 0.25";
    const RunResult r = run_cli(base + " --binary --out cal.txt");
    REQUIRE(r.code == 0);
    const std::string cal = read_bytes(ws().root / "cal.txt");
    for (const char* key : {"tau_semi = ", "tau_opaque = ", "macro_f1 = ", "tau_binary = ",
                            "binary_f1 = "}) {
        CHECK(cal.find(key) != std::string::npos);
        CHECK(r.out.find(key) != std::string::npos);
    }

    double tau_semi = -1.0;
    double tau_opaque = -1.0;
    double macro_f1 = -1.0;
    std::istringstream is(cal);
    std::string key, eq;
    double value;
    while (is >> key >> eq >> value) {
        if (key == "tau_semi") tau_semi = value;
        if (key == "tau_opaque") tau_opaque = value;
        if (key == "macro_f1") macro_f1 = value;
    }
    CHECK(tau_semi > 0.0);
    CHECK(tau_semi < tau_opaque);
    CHECK(macro_f1 >= 0.0);
    CHECK(macro_f1 <= 1.0);

    REQUIRE(run_cli(base + " --out cal_again.txt --quiet").code == 0);
    const std::string again = read_bytes(ws().root / "cal_again.txt");
    CHECK(cal.rfind(again, 0) == 0);  // same three-class block, binary rows absent
}

TEST_CASE("finetune: deterministic output that keeps the normalizer") {
    REQUIRE(ws().ready);
    const std::string base = "--seed 4 finetune --model model.bin --data weak.csv --updates 50";
    REQUIRE(run_cli(base + " --out ft.bin --quiet").code == 0);
    REQUIRE(run_cli(base + " --out ft_again.bin --quiet").code == 0);
    CHECK(same_bytes(ws().root / "ft.bin", ws().root / "ft_again.bin"));
    CHECK(!same_bytes(ws().root / "ft.bin", ws().root / "model.bin"));

    // The bundle keeps the pretraining normalizer verbatim, including its
    // noise provenance; the fine-tune noise level only drives augmentation.
    const cot::ModelBundle before = cot::load_model((ws().root / "model.bin").string());
    const cot::ModelBundle after = cot::load_model((ws().root / "ft.bin").string());
    CHECK(after.normalizer.mean == before.normalizer.mean);
    CHECK(after.normalizer.std == before.normalizer.std);
    CHECK(after.normalizer.noise_sigma == before.normalizer.noise_sigma);
    CHECK(after.normalizer.noise_level == before.normalizer.noise_level);

    // Noisy fine-tuning needs a noise-trained base model.
    REQUIRE(run_cli("--seed 11 train --data data.csv --out clean_model.bin " + kTrainArgs +
                    " --noise-level 0 --quiet")
                .code == 0);
    CHECK(run_cli("--seed 4 finetune --model clean_model.bin --data weak.csv --updates 10 "
                  "--noise-level 0.05 --out ft_bad.bin")
              .code == 2);
    CHECK(run_cli("--seed 4 finetune --model model.bin --data weak.csv --updates 10 "
                  "--noise-level 0.05 --out ft_noisy.bin --quiet")
              .code == 0);
}

TEST_CASE("infer: COT map, class mask and an image-level verdict") {
    REQUIRE(ws().ready);
    const std::string base = "infer --model model.bin --input scene.raster";
    RunResult r = run_cli(base + " --out-prefix pred/a");
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(ws().root / "pred" / "a.cot"));
    REQUIRE(fs::exists(ws().root / "pred" / "a.mask.pgm"));
    CHECK(r.out.find("verdict = ") != std::string::npos);

    // The verdict line survives --quiet; it is the command's primary output.
    r = run_cli(base + " --out-prefix pred/b --quiet");
    REQUIRE(r.code == 0);
    const bool clear = r.out.find("verdict = clear") != std::string::npos;
    const bool cloudy = r.out.find("verdict = cloudy") != std::string::npos;
    CHECK((clear || cloudy));
    CHECK(same_bytes(ws().root / "pred" / "a.cot", ws().root / "pred" / "b.cot"));
    CHECK(same_bytes(ws().root / "pred" / "a.mask.pgm", ws().root / "pred" / "b.mask.pgm"));

    const cot::CotMap map = cot::load_cot_map((ws().root / "pred" / "a.cot").string());
    REQUIRE(map.height == 10);
    REQUIRE(map.width == 12);
    for (double v : map.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 50.0);
    }
    const std::string pgm = read_bytes(ws().root / "pred" / "a.mask.pgm");
    CHECK(pgm.rfind("P5\n12 10\n255\n", 0) == 0);

    // --m 1 and --no-smooth are the same thing; the default window is not.
    REQUIRE(run_cli(base + " --out-prefix pred/m1 --m 1 --quiet").code == 0);
    REQUIRE(run_cli(base + " --out-prefix pred/raw --no-smooth --quiet").code == 0);
    CHECK(same_bytes(ws().root / "pred" / "m1.cot", ws().root / "pred" / "raw.cot"));
    CHECK(!same_bytes(ws().root / "pred" / "a.cot", ws().root / "pred" / "raw.cot"));

    // Thresholds shift the mask: an absurdly high tau_semi marks everything clear.
    REQUIRE(run_cli(base + " --out-prefix pred/hi --tau-semi 49 --tau-opaque 50 --quiet").code ==
            0);
    const cot::ClassMask hi = cot::load_class_mask((ws().root / "pred" / "hi.mask.pgm").string());
    for (std::uint8_t l : hi.labels) CHECK(l == 0);
}

TEST_CASE("config files supply option values and flags override them") {
    REQUIRE(ws().ready);
    write_text(ws().root / "cfg.ini",
               "seed=7\n"
               "quiet=true\n"
               "\n"
               "[generate]\n"
               "n=40\n"
               "out=from_config.csv\n");
    REQUIRE(run_cli("--config cfg.ini --out-dir cfgrun1 generate").code == 0);
    REQUIRE(run_cli("--seed 7 generate --n 40 --out direct7.csv --quiet").code == 0);
    CHECK(same_bytes(ws().root / "cfgrun1" / "from_config.csv", ws().root / "direct7.csv"));

    // A seed given on the command line beats the one in the file.
    REQUIRE(run_cli("--config cfg.ini --out-dir cfgrun2 --seed 9 generate").code == 0);
    REQUIRE(run_cli("--seed 9 generate --n 40 --out direct9.csv --quiet").code == 0);
    CHECK(same_bytes(ws().root / "cfgrun2" / "from_config.csv", ws().root / "direct9.csv"));
    CHECK(!same_bytes(ws().root / "cfgrun1" / "from_config.csv",
                      ws().root / "cfgrun2" / "from_config.csv"));

    CHECK(run_cli("--config no_such_config.ini generate --n 8 --out x.csv").code == 2);
}

TEST_CASE("out-dir prefixes relative outputs and creates parents") {
    REQUIRE(ws().ready);
    REQUIRE(run_cli("--seed 2 --out-dir artifacts generate --n 8 --out sub/d.csv --quiet").code ==
            0);
    CHECK(fs::exists(ws().root / "artifacts" / "sub" / "d.csv"));

    const fs::path abs = ws().root / "absolute_out.csv";
    REQUIRE(run_cli("--seed 2 --out-dir artifacts generate --n 8 --out '" + abs.string() +
                    "' --quiet")
                .code == 0);
    CHECK(fs::exists(abs));
    CHECK(same_bytes(ws().root / "artifacts" / "sub" / "d.csv", abs));
}

TEST_CASE("benchmark reports a median over the requested runs") {
    REQUIRE(ws().ready);
    const RunResult r =
        run_cli("benchmark --model model.bin --height 12 --width 9 --runs 3 --warmup 1");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("image = 12x9x12") != std::string::npos);
    CHECK(r.out.find("models = 1") != std::string::npos);
    CHECK(r.out.find("timed_runs = 3") != std::string::npos);
    CHECK(r.out.find("median_seconds_per_image = ") != std::string::npos);
    CHECK(r.out.find("hardware = ") != std::string::npos);

    CHECK(run_cli("benchmark --model model.bin --runs 0").code == 2);
}

TEST_CASE("the generate -> train -> eval -> infer chain is reproducible") {
    REQUIRE(ws().ready);
    for (const char* dir : {"runA", "runB"}) {
        const std::string prefix = "--seed 21 --out-dir " + std::string(dir) + " --quiet ";
        REQUIRE(run_cli(prefix + "generate --n 80 --out d.csv").code == 0);
        REQUIRE(run_cli(prefix + "train --data " + dir + "/d.csv --out m.bin --updates 120 "
                        "--hidden 8 --layers 3 --eval-every 60 --history h.csv")
                    .code == 0);
        REQUIRE(run_cli(prefix + "eval --model " + dir + "/m.bin --data " + dir +
                        "/d.csv --out r.csv")
                    .code == 0);
        REQUIRE(run_cli(prefix + "infer --model " + dir + "/m.bin --input scene.raster "
                        "--out-prefix p")
                    .code == 0);
    }
    for (const char* name : {"d.csv", "m.bin", "h.csv", "r.csv", "p.cot", "p.mask.pgm"}) {
        INFO(name);
        CHECK(same_bytes(ws().root / "runA" / name, ws().root / "runB" / name));
    }
}
