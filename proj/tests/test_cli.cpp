#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fedsnn/io.hpp"

// Drives the installed binary exactly as a user would; FEDSNN_CLI_PATH is
// injected by the build.

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(FEDSNN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// CSV text minus the wall_ms column (the only timing-dependent cell).
std::string strip_wall_text(const std::string& csv) {
    std::string result;
    size_t start = 0;
    while (start < csv.size()) {
        size_t end = csv.find('\n', start);
        if (end == std::string::npos) end = csv.size();
        const std::string line = csv.substr(start, end - start);
        int commas = 0;
        for (char ch : line) {
            if (ch == ',') ++commas;
            if (commas != 4) result.push_back(ch);
        }
        result.push_back('\n');
        start = end + 1;
    }
    return result;
}

std::string metrics_without_wall(const std::string& path) {
    return strip_wall_text(fedsnn::read_file(path));
}

struct Workspace {
    std::string dir = "cli_workspace";
    Workspace() {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~Workspace() { std::filesystem::remove_all(dir); }
};

}  // namespace

TEST_CASE("cli: synth then train produces all artifacts with exit 0") {
    Workspace ws;
    REQUIRE(run("synth --classes 3 --per-class 10 --side 8 --channels 1 --seed 5 --out " +
                ws.dir + "/train.fds") == 0);
    REQUIRE(run("synth --classes 3 --per-class 4 --side 8 --channels 1 --seed 6 --out " +
                ws.dir + "/test.fds") == 0);

    fedsnn::write_file_atomic(ws.dir + "/exp.cfg",
                              "dataset = " + ws.dir + "/train.fds\n" +
                                  "test_dataset = " + ws.dir + "/test.fds\n" +
                                  "clients = 2\nparticipation = 1.0\n"
                                  "per_class_per_client = 3\nbatch_size = 4\n"
                                  "time_steps = 3\nrounds = 1\nseed = 11\n");
    REQUIRE(run("train --config " + ws.dir + "/exp.cfg --out " + ws.dir + "/run") == 0);
    CHECK(std::filesystem::exists(ws.dir + "/run/metrics.csv"));
    CHECK(std::filesystem::exists(ws.dir + "/run/model.ckpt"));
    CHECK(std::filesystem::exists(ws.dir + "/run/energy.csv"));
    CHECK(std::filesystem::exists(ws.dir + "/run/config.resolved"));

    // Identical rerun: byte-identical metrics modulo the wall-clock column.
    REQUIRE(run("train --config " + ws.dir + "/exp.cfg --out " + ws.dir + "/run_again") == 0);
    CHECK(metrics_without_wall(ws.dir + "/run/metrics.csv") ==
          metrics_without_wall(ws.dir + "/run_again/metrics.csv"));
    CHECK(fedsnn::read_file(ws.dir + "/run/model.ckpt") ==
          fedsnn::read_file(ws.dir + "/run_again/model.ckpt"));

    // Energy subcommand over the fresh checkpoint.
    REQUIRE(run("energy --ckpt " + ws.dir + "/run/model.ckpt --data " + ws.dir +
                "/test.fds --out " + ws.dir + "/energy") == 0);
    CHECK(std::filesystem::exists(ws.dir + "/energy/energy.csv"));
}

TEST_CASE("cli: config errors exit 1, runtime errors exit 2") {
    Workspace ws;
    fedsnn::write_file_atomic(ws.dir + "/bad.cfg", "lambda = 1.5\n");
    CHECK(run("train --config " + ws.dir + "/bad.cfg --out " + ws.dir + "/x") == 1);

    fedsnn::write_file_atomic(ws.dir + "/missing.cfg",
                              "dataset = nope.fds\ntest_dataset = nope2.fds\n");
    CHECK(run("train --config " + ws.dir + "/missing.cfg --out " + ws.dir + "/x") == 1);
    CHECK(!std::filesystem::exists(ws.dir + "/x/metrics.csv"));

    // Valid config pointing at a corrupt dataset: runtime failure.
    fedsnn::write_file_atomic(ws.dir + "/corrupt.fds", "XXXXgarbage");
    fedsnn::write_file_atomic(ws.dir + "/corrupt.cfg",
                              "dataset = " + ws.dir + "/corrupt.fds\n" +
                                  "test_dataset = " + ws.dir + "/corrupt.fds\n");
    CHECK(run("train --config " + ws.dir + "/corrupt.cfg --out " + ws.dir + "/y") == 2);

    CHECK(run("energy --ckpt missing.ckpt --data missing.fds --out " + ws.dir + "/z") == 2);
    CHECK(run("definitely-not-a-subcommand") == 1);
}

TEST_CASE("cli: FEDSNN_SEED overrides the config seed") {
    Workspace ws;
    REQUIRE(run("synth --classes 3 --per-class 8 --side 8 --channels 1 --seed 5 --out " +
                ws.dir + "/train.fds") == 0);
    REQUIRE(run("synth --classes 3 --per-class 3 --side 8 --channels 1 --seed 6 --out " +
                ws.dir + "/test.fds") == 0);
    fedsnn::write_file_atomic(ws.dir + "/exp.cfg",
                              "dataset = " + ws.dir + "/train.fds\n" +
                                  "test_dataset = " + ws.dir + "/test.fds\n" +
                                  "clients = 2\nparticipation = 1.0\n"
                                  "per_class_per_client = 2\nbatch_size = 4\n"
                                  "time_steps = 2\nrounds = 1\nseed = 11\n");

    const std::string base = std::string(FEDSNN_CLI_PATH);
    REQUIRE(std::system((base + " train --config " + ws.dir + "/exp.cfg --out " + ws.dir +
                         "/a >/dev/null 2>&1").c_str()) == 0);
    REQUIRE(std::system(("FEDSNN_SEED=777 " + base + " train --config " + ws.dir +
                         "/exp.cfg --out " + ws.dir + "/b >/dev/null 2>&1").c_str()) == 0);
    // Overridden seed flows into the resolved config and changes the run.
    CHECK(fedsnn::read_file(ws.dir + "/b/config.resolved").find("seed = 777") !=
          std::string::npos);
    CHECK(fedsnn::read_file(ws.dir + "/a/model.ckpt") !=
          fedsnn::read_file(ws.dir + "/b/model.ckpt"));
}

TEST_CASE("cli: single-value sweep matches train modulo the sweep column") {
    Workspace ws;
    REQUIRE(run("synth --classes 3 --per-class 8 --side 8 --channels 1 --seed 5 --out " +
                ws.dir + "/train.fds") == 0);
    REQUIRE(run("synth --classes 3 --per-class 3 --side 8 --channels 1 --seed 6 --out " +
                ws.dir + "/test.fds") == 0);
    fedsnn::write_file_atomic(ws.dir + "/exp.cfg",
                              "dataset = " + ws.dir + "/train.fds\n" +
                                  "test_dataset = " + ws.dir + "/test.fds\n" +
                                  "clients = 2\nparticipation = 1.0\n"
                                  "per_class_per_client = 2\nbatch_size = 4\n"
                                  "time_steps = 2\nrounds = 2\nnoise_ratio = 0.1\nseed = 11\n");
    REQUIRE(run("train --config " + ws.dir + "/exp.cfg --out " + ws.dir + "/train_out") == 0);
    REQUIRE(run("sweep --config " + ws.dir + "/exp.cfg --axis noise --values 0.1 --out " +
                ws.dir + "/sweep_out") == 0);

    const std::string combined = fedsnn::read_file(ws.dir + "/sweep_out/combined.csv");
    CHECK(combined.rfind("sweep_value,round,", 0) == 0);

    // Strip the sweep_value column and compare to the train metrics.
    std::string stripped = "";
    size_t start = combined.find('\n') + 1;
    while (start < combined.size()) {
        size_t end = combined.find('\n', start);
        if (end == std::string::npos) break;
        const std::string line = combined.substr(start, end - start);
        stripped += line.substr(line.find(',') + 1) + "\n";
        start = end + 1;
    }
    const std::string direct = fedsnn::read_file(ws.dir + "/train_out/metrics.csv");
    const std::string direct_body = direct.substr(direct.find('\n') + 1);
    CHECK(strip_wall_text(stripped) == strip_wall_text(direct_body));
}
