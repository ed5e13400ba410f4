#include <doctest.h>

#include "matmech/cli.hpp"
#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <numbers>
#include <sys/wait.h>
#include <unistd.h>

using namespace matmech;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("matmech_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path(const std::string& name) { return (scratch_dir() / name).string(); }

// Value printed on a "key value" line of the summary.
double summary_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string k;
    double v = 0.0;
    while (in >> k) {
        if (k == key && in >> v) return v;
    }
    FAIL("key " << key << " not found in output");
    return 0.0;
}

}  // namespace

TEST_CASE("ccr on the oscillator") {
    const auto r = run_cli({"ccr", "--potential", "harmonic:M=1,omega0=1", "--hbar", "1", "--levels",
                            "64", "--band", "2", "--convention", "upper", "--out", path("ccr.csv")});
    REQUIRE(r.code == 0);
    CHECK(summary_value(r.out, "max_diag_dev") <= 1e-8);
    CHECK(summary_value(r.out, "max_offdiag") <= 1e-8);
    const std::string csv = read_text_file(path("ccr.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 64 - 4);
}

TEST_CASE("ritz-fit round trip") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> c(10);
    for (auto& x : c) x = u(rng);
    const TermValues tv(c);
    write_text_file(path("lines.csv"), line_list_to_csv(tv.table(), full_mask(10)));

    const auto r = run_cli({"ritz-fit", "--input", path("lines.csv"), "--out", path("terms.json")});
    REQUIRE(r.code == 0);
    CHECK(summary_value(r.out, "residual") <= 1e-10);
    const auto doc = nlohmann::json::parse(read_text_file(path("terms.json")));
    CHECK(doc["gauge_index"] == 0);
    CHECK(doc["residual"].get<double>() <= 1e-10);
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(doc["terms"][i].get<double>() - (c[i] - c[0])) <= 1e-10);
}

TEST_CASE("domain errors exit 1 with the error name") {
    auto r = run_cli({"orbit", "--potential", "pendulum:g=1,L=1", "--energy", "5.0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("non-oscillatory") != std::string::npos);

    r = run_cli({"ritz-fit", "--input", path("does-not-exist.csv")});
    CHECK(r.code == 1);
    CHECK(r.err.find("does-not-exist.csv") != std::string::npos);

    r = run_cli({"overtone", "--m", "3", "--k", "3"});
    CHECK(r.code == 1);
    CHECK(r.err.find("jump-out-of-range") != std::string::npos);

    r = run_cli({"ccr", "--potential", "quadratic:a=1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("bad-potential-spec") != std::string::npos);

    r = run_cli({"quantize", "--levels", "4", "--band", "4"});
    CHECK(r.code == 1);
    CHECK(r.err.find("band-exceeds-size") != std::string::npos);
}

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"ccr", "--bogus", "1"}).code == 2);
    CHECK(run_cli({"ccr", "--levels", "many"}).code == 2);
    CHECK(run_cli({"ccr", "--convention", "lower"}).code == 2);
    CHECK(run_cli({"orbit"}).code == 2);  // --energy is required
    CHECK(run_cli({"ritz-fit"}).code == 2);

    const auto top = run_cli({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("correspondence") != std::string::npos);
    const auto sub = run_cli({"ccr", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("harmonic:M=1,omega0=1") != std::string::npos);
    CHECK(sub.out.find("upper") != std::string::npos);
}

TEST_CASE("render and parse are mutually consistent") {
    const std::vector<std::vector<std::string>> lines = {
        {"ccr", "--potential", "harmonic", "--levels", "32"},
        {"quantize", "--potential", "quartic:lambda=0.25", "--hbar", "0.01", "--convention", "row",
         "--observable", "p2"},
        {"orbit", "--potential", "pendulum:g=9.81", "--energy", "1e-1", "--out", "o.csv"},
        {"fourier", "--action", "0.5", "--nmin", "-3", "--nmax", "5"},
        {"correspondence", "--a", "q", "--b", "q2", "--ell", "1", "--m", "12", "--band", "3"},
        {"balmer", "--levels", "7", "--c", "3e8"},
        {"overtone", "--m", "100", "--k", "-2"},
        {"ritz-fit", "--input", "x.csv"},
    };
    for (const auto& argv : lines) {
        const auto cfg = cli::parse(argv);
        const std::string canonical = cli::render(cfg);
        std::vector<std::string> tokens;
        std::istringstream in(canonical);
        for (std::string t; in >> t;) tokens.push_back(t);
        const auto again = cli::parse(tokens);
        CHECK(again == cfg);
        CHECK(cli::render(again) == canonical);
    }
    const auto cfg = cli::parse({"ccr", "--potential", "harmonic:omega0=1"});
    CHECK(cfg.potential == "harmonic:M=1,omega0=1");
    CHECK_THROWS_AS(cli::parse({"ccr", "--bogus"}), cli::UsageError);
}

TEST_CASE("outputs are byte-identical across runs") {
    const std::vector<std::string> base = {"quantize", "--potential", "quartic:lambda=0.25",
                                           "--hbar", "0.05", "--levels", "12", "--band", "3"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", path("q1.json")});
    b.insert(b.end(), {"--out", path("q2.json")});
    REQUIRE(run_cli(a).code == 0);
    REQUIRE(run_cli(b).code == 0);
    CHECK(read_text_file(path("q1.json")) == read_text_file(path("q2.json")));

    const auto doc = nlohmann::json::parse(read_text_file(path("q1.json")));
    CHECK(doc["N"] == 12);
    CHECK(doc["amp"].size() == 12);
    CHECK(doc["amp"][0].size() == 12);
    CHECK(doc["convention"] == "upper");
}

TEST_CASE("orbit writes csv and sidecar") {
    const auto r = run_cli({"orbit", "--potential", "harmonic", "--energy", "0.5", "--samples",
                            "64", "--out", path("orbit.csv")});
    REQUIRE(r.code == 0);
    CHECK(std::abs(summary_value(r.out, "T") - 2.0 * std::numbers::pi) <= 1e-8);
    const std::string csv = read_text_file(path("orbit.csv"));
    CHECK(csv.rfind("t,q,p\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 65);
    const auto meta = nlohmann::json::parse(read_text_file(path("orbit.json")));
    CHECK(std::abs(meta["I"].get<double>() - 0.5) <= 1e-8);
    CHECK(meta["samples"] == 64);
}

TEST_CASE("fourier, balmer, overtone and correspondence summaries") {
    auto r = run_cli({"fourier", "--potential", "harmonic", "--energy", "0.5", "--nmin", "-2",
                      "--nmax", "2", "--out", path("f.json")});
    REQUIRE(r.code == 0);
    const auto f = fourier_series_from_json(read_text_file(path("f.json")));
    CHECK(std::abs(f.coefficient(1) - complex(0.5, 0.0)) < 1e-8);

    r = run_cli({"balmer", "--levels", "6", "--out", path("b.json")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("ritz_ok true") != std::string::npos);
    const auto b = nlohmann::json::parse(read_text_file(path("b.json")));
    CHECK(b["level_offset"] == 1);
    CHECK(b["N"] == 6);

    r = run_cli({"overtone", "--m", "100", "--k", "1"});
    REQUIRE(r.code == 0);
    CHECK(std::abs(summary_value(r.out, "ratio") - 1.0) <= 3.0 / 100.0);

    r = run_cli({"correspondence", "--potential", "harmonic", "--levels", "16", "--band", "4",
                 "--m", "8"});
    REQUIRE(r.code == 0);
    const auto c = nlohmann::json::parse(r.out);
    CHECK(c["rel_error"].get<double>() <= 1e-8);
}

TEST_CASE("empty line list gives a header-only table") {
    write_text_file(path("empty.csv"), line_list_to_csv(FrequencyTable(Eigen::MatrixXd::Zero(1, 1)), {}));
    CHECK(read_text_file(path("empty.csv")) == "m,n,omega\n");
}

TEST_CASE("installed binary exit codes") {
    const std::string exe = MATMECH_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status("overtone --m 50 --k 2") == 0);
    CHECK(status("orbit --potential pendulum:g=1,L=1 --energy 5.0") == 1);
    CHECK(status("--no-such-flag") == 2);
    CHECK(status("--help") == 0);
}
