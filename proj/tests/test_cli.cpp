#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string cli = TRENDLAB_CLI_PATH;

int run(const std::string& args) {
    const std::string command = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// report.csv with the two measured wall-time fields blanked out
std::string mask_timing_columns(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream fs_(line);
        while (std::getline(fs_, field, ',')) fields.push_back(field);
        if (fields.size() >= 9) {
            fields[6] = "*";
            fields[7] = "*";
        }
        for (std::size_t i = 0; i < fields.size(); ++i)
            out << (i ? "," : "") << fields[i];
        out << '\n';
    }
    return out.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("synth writes the requested number of bars") {
    TempDir dir("trendlab_cli_synth");
    const fs::path out = dir.path / "bars.csv";
    REQUIRE(run("synth --kind sinusoid --length 200 --amplitude 5 --seed 7 --out " +
                out.string()) == 0);
    REQUIRE(fs::exists(out));
    CHECK(line_count(slurp(out)) == 201); // header + 200 rows
}

TEST_CASE("synth is byte-reproducible per seed") {
    TempDir dir("trendlab_cli_synth_repro");
    const fs::path a = dir.path / "a.csv";
    const fs::path b = dir.path / "b.csv";
    REQUIRE(run("synth --kind gbm --length 150 --volatility 0.02 --seed 9 --out " +
                a.string()) == 0);
    REQUIRE(run("synth --kind gbm --length 150 --volatility 0.02 --seed 9 --out " +
                b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("features and label subcommands produce aligned csv files") {
    TempDir dir("trendlab_cli_feat");
    const fs::path bars = dir.path / "bars.csv";
    REQUIRE(run("synth --kind regime_switch --length 160 --drift 0.01 --volatility 0.004"
                " --segment-length 30 --seed 3 --out " +
                bars.string()) == 0);

    const fs::path feat = dir.path / "features.csv";
    REQUIRE(run("features --data " + bars.string() + " --mode crossovers --out " +
                feat.string()) == 0);
    const std::string feature_csv = slurp(feat);
    CHECK(line_count(feature_csv) == 161);
    CHECK(feature_csv.find("xover_5_20") != std::string::npos);
    CHECK(feature_csv.find("NaN") != std::string::npos); // warmup cells

    const fs::path labels = dir.path / "labels.csv";
    REQUIRE(run("label --data " + bars.string() + " --out " + labels.string()) == 0);
    const std::string label_csv = slurp(labels);
    CHECK(line_count(label_csv) == 161);
    CHECK(label_csv.rfind("date,label,eligible\n", 0) == 0);
}

TEST_CASE("features accepts a custom manifest file") {
    TempDir dir("trendlab_cli_manifest");
    const fs::path bars = dir.path / "bars.csv";
    REQUIRE(run("synth --kind gbm --length 40 --volatility 0.01 --seed 2 --out " +
                bars.string()) == 0);
    const fs::path manifest = dir.path / "indicators.txt";
    std::ofstream(manifest) << "# tiny manifest\nsma(period=2)\nrsi(period=5)\n";
    const fs::path out = dir.path / "features.csv";
    REQUIRE(run("features --data " + bars.string() + " --manifest " + manifest.string() +
                " --no-price-volume --out " + out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("date,sma_2,rsi_5\n", 0) == 0);

    std::ofstream(manifest) << "frobnicator(period=2)\n";
    CHECK(run("features --data " + bars.string() + " --manifest " + manifest.string() +
              " --out " + out.string()) == 1);
}

TEST_CASE("usage errors exit with 2, runtime errors with 1") {
    CHECK(run("frobnicate") == 2);
    CHECK(run("synth --kind sinusoid") == 2);           // missing required --out
    CHECK(run("synth --no-such-flag --out x.csv") == 2);
    CHECK(run("label --data /no/such/file.csv --out /tmp/x.csv") == 1);
    TempDir dir("trendlab_cli_badlen");
    const fs::path bars = dir.path / "bars.csv";
    REQUIRE(run("synth --kind gbm --length 5 --seed 1 --out " + bars.string()) == 0);
    CHECK(run("label --data " + bars.string() + " --out " + (dir.path / "l.csv").string()) ==
          1); // too short to label
}

TEST_CASE("help lists flags for every subcommand") {
    for (const char* sub : {"synth", "features", "label", "sweep", "cv"}) {
        const std::string command =
            cli + " " + sub + " --help > /tmp/trendlab_help.txt 2>&1";
        REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
        const std::string help = slurp("/tmp/trendlab_help.txt");
        CHECK(help.find("--help") != std::string::npos);
        if (std::string(sub) == "sweep") {
            CHECK(help.find("--sizes") != std::string::npos);
            CHECK(help.find("--ae-lr") != std::string::npos);
        }
    }
}

TEST_CASE("sweep writes reports and is deterministic modulo wall times") {
    TempDir dir("trendlab_cli_sweep");
    const fs::path bars = dir.path / "bars.csv";
    REQUIRE(run("synth --kind regime_switch --length 260 --drift 0.01 --volatility 0.004"
                " --segment-length 40 --seed 5 --out " +
                bars.string()) == 0);

    const std::string common =
        "sweep --data " + bars.string() +
        " --reducer ae --sizes 2,4 --scaler ecdf --mode crossovers"
        " --ae-epochs 4 --ae-patience 4 --seed 1 --out-dir ";
    const fs::path run_a = dir.path / "a";
    const fs::path run_b = dir.path / "b";
    REQUIRE(run(common + run_a.string()) == 0);
    REQUIRE(run(common + run_b.string()) == 0);

    const std::string csv_a = slurp(run_a / "report.csv");
    const std::string csv_b = slurp(run_b / "report.csv");
    CHECK(line_count(csv_a) == 4); // header + baseline + 2 sizes
    CHECK(mask_timing_columns(csv_a) == mask_timing_columns(csv_b));
    CHECK(slurp(run_a / "accuracy_by_hidden.dat") == slurp(run_b / "accuracy_by_hidden.dat"));
}

TEST_CASE("cv produces one row per fold per reducer") {
    TempDir dir("trendlab_cli_cv");
    const fs::path bars = dir.path / "bars.csv";
    REQUIRE(run("synth --kind regime_switch --length 300 --drift 0.01 --volatility 0.004"
                " --segment-length 40 --seed 11 --out " +
                bars.string()) == 0);
    const fs::path out = dir.path / "cv";
    REQUIRE(run("cv --data " + bars.string() +
                " --k 3 --reducer both --hidden-ae 4 --hidden-rbm 3 --mode crossovers"
                " --ae-epochs 3 --ae-patience 3 --rbm-epochs 3 --rbm-patience 3"
                " --seed 2 --out-dir " +
                out.string()) == 0);
    const std::string csv = slurp(out / "report.csv");
    CHECK(line_count(csv) == 7); // header + 2 reducers x 3 folds
}

TEST_CASE("a failing run leaves no partial report files") {
    TempDir dir("trendlab_cli_fail");
    const fs::path bad = dir.path / "bad.csv";
    std::ofstream(bad) << "not,a,real,header\n1,2,3,4\n";
    const fs::path out = dir.path / "report";
    CHECK(run("sweep --data " + bad.string() + " --sizes 2 --out-dir " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out / "report.csv"));
    CHECK_FALSE(fs::exists(out / "report.csv.tmp"));
}

TEST_CASE("config file supplies defaults, flags win over the file") {
    TempDir dir("trendlab_cli_config");
    const fs::path conf = dir.path / "run.conf";
    std::ofstream(conf) << "seed = 77\n\n[synth]\nkind = \"gbm\"\nlength = 50\n"
                           "volatility = 0.01\n";
    const fs::path a = dir.path / "a.csv";
    const fs::path b = dir.path / "b.csv";
    const fs::path c = dir.path / "c.csv";
    REQUIRE(run("synth --config " + conf.string() + " --out " + a.string()) == 0);
    REQUIRE(run("synth --kind gbm --length 50 --volatility 0.01 --seed 77 --out " +
                b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    // a flag overrides the file
    REQUIRE(run("synth --config " + conf.string() + " --length 20 --out " + c.string()) ==
            0);
    CHECK(line_count(slurp(c)) == 21);
}

TEST_CASE("TRENDLAB_SEED provides the default seed") {
    TempDir dir("trendlab_cli_envseed");
    const fs::path a = dir.path / "a.csv";
    const fs::path b = dir.path / "b.csv";
    const std::string base =
        "synth --kind gbm --length 60 --volatility 0.01 --out ";
    REQUIRE(WEXITSTATUS(std::system(
                ("TRENDLAB_SEED=123 " + cli + " " + base + a.string() + " >/dev/null 2>&1")
                    .c_str())) == 0);
    REQUIRE(run(base + b.string() + " --seed 123") == 0);
    CHECK(slurp(a) == slurp(b));
}
