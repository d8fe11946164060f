/*
 * Copyright 2026 The nicperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <openssl/evp.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "nicperf/accel_model.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = NICPERF_CLI;
const std::string kData = NICPERF_DATA;
const std::string kGolden = NICPERF_GOLDEN;

const fs::path kWork = fs::temp_directory_path() / ("nicperf-cli-" + std::to_string(::getpid()));

fs::path workdir() {
    static const bool ready = [] {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        std::atexit([] {
            std::error_code ec;
            fs::remove_all(kWork, ec);
        });
        return true;
    }();
    (void)ready;
    return kWork;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code = -1;
    std::string out, err;
};

Run cli(const std::string& args) {
    const auto o = path("stdout.txt"), e = path("stderr.txt");
    const std::string cmd = "cd '" + workdir().string() + "' && '" + kCli + "' " + args + " >'" + o + "' 2>'" + e + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

std::string sha256(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

// Profiles and trains flowmonitor once for the whole suite.
const std::string& flowmonitor_bundle() {
    static const std::string bundle = [] {
        REQUIRE(cli("profile --nf flowmonitor --strategy adaptive --seed 5 --out fm.jsonl").code == 0);
        REQUIRE(cli("train --nf flowmonitor --dataset fm.jsonl --out fm.bundle.json").code == 0);
        return path("fm.bundle.json");
    }();
    return bundle;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("simulate matches the golden digest and the closed form") {
    const auto r = cli("simulate --scenario '" + kData + "/scenario_accel_pair.json' --out sim.json");
    REQUIRE(r.code == 0);
    const auto text = slurp(path("sim.json"));
    CHECK(sha256(text) == trim(slurp(kGolden + "/scenario_accel_pair.sha256")));

    // Two backlogged queue sets on one engine, n = 2 and n = 1, t = 10 us.
    nicperf::accel::AccelModelParams a{nicperf::ResourceKind::RegexAccel, 2, 1e-5, 0.0}, b{nicperf::ResourceKind::RegexAccel, 1, 1e-5, 0.0};
    const nicperf::TrafficProfile t{16000, 512, 400};
    const auto j = nlohmann::json::parse(text);
    CHECK(j["nfs"]["rx-a"]["throughput"].get<double>() ==
          doctest::Approx(nicperf::accel::predict_equilibrium(a, t, {{b, t, std::nullopt}})).epsilon(0.02));
    CHECK(j["nfs"]["rx-b"]["throughput"].get<double>() == doctest::Approx(20000.0).epsilon(0.02));

    const auto side = nlohmann::json::parse(slurp(path("sim.json.manifest.json")));
    CHECK(side["run"]["command"] == "simulate");
    CHECK(side["run"]["outputs"][0]["sha256"] == sha256(text));
}

TEST_CASE("evaluate on the sample test grid") {
    const auto& bundle = flowmonitor_bundle();
    const auto r = cli("evaluate --bundle '" + bundle + "' --testgrid '" + kData +
                       "/testgrid_flowmonitor.json' --out eval.csv --detail detail.csv");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(slurp(path("eval.csv")));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"nf", "variant", "points", "mape_pct", "acc5_pct", "acc10_pct"});
    CHECK(rows[1][1] == "full");
    CHECK(rows[2][1] == "memory_only");
    CHECK(rows[1][2] == "150");
    const double mape = std::stod(rows[1][3]);
    MESSAGE("CLI flowmonitor MAPE " << mape << "%");
    CHECK(mape <= 6.0);
    CHECK(std::stod(rows[2][3]) > mape);
    CHECK(csv_rows(slurp(path("detail.csv"))).size() == 151);
}

TEST_CASE("out-of-box traffic exits 2 with a structured error") {
    const auto& bundle = flowmonitor_bundle();
    std::ofstream(path("contention.json")) << R"({"counters": {}, "accelerators": {"regex": []}})";
    const auto ok = cli("predict --bundle '" + bundle + "' --traffic '" + kData +
                        "/traffic_default.json' --contention contention.json");
    REQUIRE(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out)["prediction"]["throughput"].get<double>() > 0.0);

    const auto r = cli("predict --bundle '" + bundle + "' --traffic '" + kData +
                       "/traffic_out_of_box.json' --contention contention.json");
    CHECK(r.code == 2);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"] == "out-of-domain");
}

TEST_CASE("usage errors exit 1") {
    CHECK(cli("").code != 0);
    CHECK(cli("predict --bundle x.json").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("profile --nf flowmonitor --strategy bogus --out x.jsonl").code == 1);
    CHECK(cli("--help").code == 0);
    const auto v = cli("--version");
    CHECK(v.code == 0);
    CHECK(!v.out.empty());
}

TEST_CASE("malformed inputs exit 2") {
    std::ofstream(path("broken.json")) << "{ not json";
    const auto r = cli("simulate --scenario broken.json --out never.json");
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err).contains("error"));
    CHECK(cli("profile --nf no-such-nf --strategy adaptive --out x.jsonl").code == 2);
}

TEST_CASE("a test grid for another NF is rejected") {
    const auto& bundle = flowmonitor_bundle();
    std::ofstream(path("other.json")) << R"({"nf": "nids", "random": {"count": 5, "seed": 1}})";
    const auto r = cli("evaluate --bundle '" + bundle + "' --testgrid other.json --out never.csv");
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"] == "invalid-input");
    CHECK_FALSE(fs::exists(workdir() / "never.csv"));
}

TEST_CASE("identical seeds reproduce byte-identical outputs") {
    REQUIRE(cli("profile --nf nids --strategy adaptive --seed 9 --out a.jsonl").code == 0);
    const auto first = slurp(path("a.jsonl"));
    const auto first_side = slurp(path("a.jsonl.manifest.json"));
    REQUIRE(cli("profile --nf nids --strategy adaptive --seed 9 --out a.jsonl").code == 0);
    CHECK(slurp(path("a.jsonl")) == first);
    CHECK(slurp(path("a.jsonl.manifest.json")) == first_side);
    REQUIRE(cli("profile --nf nids --strategy adaptive --seed 9 --jobs 3 --out b.jsonl").code == 0);
    CHECK(slurp(path("b.jsonl")) == first);

    REQUIRE(cli("train --nf nids --dataset a.jsonl --out n1.json").code == 0);
    REQUIRE(cli("train --nf nids --dataset a.jsonl --out n2.json").code == 0);
    CHECK(slurp(path("n1.json")) == slurp(path("n2.json")));

    const std::string sched = "schedule --arrivals '" + kData + "/arrivals_random.json' --strategy contention_aware"
                              " --bundle n1.json --bundle '" + flowmonitor_bundle() + "' --out ";
    REQUIRE(cli(sched + "f1.json").code == 0);
    REQUIRE(cli(sched + "f2.json").code == 0);
    CHECK(slurp(path("f1.json")) == slurp(path("f2.json")));

    REQUIRE(cli("profile --nf nids --strategy adaptive --seed 10 --out c.jsonl").code == 0);
    CHECK(slurp(path("c.jsonl")) != first);
}

TEST_CASE("schedule, diagnose and report end to end") {
    const auto& fm = flowmonitor_bundle();
    REQUIRE(cli("profile --nf nids --strategy adaptive --out nids.jsonl").code == 0);
    REQUIRE(cli("train --nf nids --dataset nids.jsonl --out nids.bundle.json").code == 0);

    REQUIRE(cli("schedule --arrivals '" + kData + "/arrivals_random.json' --strategy contention_aware --bundle nids.bundle.json"
                " --bundle '" + fm + "' --out fleet.json").code == 0);
    const auto fleet = nlohmann::json::parse(slurp(path("fleet.json")));
    CHECK(fleet.contains("nics"));
    REQUIRE(cli("schedule-eval --fleet fleet.json --out fleet.eval.json").code == 0);
    const auto ev = nlohmann::json::parse(slurp(path("fleet.eval.json")));
    CHECK(ev["nfs"] == 12);
    CHECK(ev["optimum_exact"] == true);
    CHECK(ev["wastage_pct"].get<double>() >= 0.0);

    const auto dg = cli("diagnose --bundle nids.bundle.json --sweep '" + kData + "/sweep_mtbr.json' --out diag.csv");
    REQUIRE(dg.code == 0);
    const auto summary = nlohmann::json::parse(dg.out);
    MESSAGE(summary.dump());
    const auto rows = csv_rows(slurp(path("diag.csv")));
    CHECK(rows.size() == 24);
    CHECK(rows[0][0] == "value");

    REQUIRE(cli("evaluate --bundle '" + fm + "' --testgrid '" + kData + "/testgrid_flowmonitor.json' --out e.csv").code == 0);
    REQUIRE(cli("report --inputs e.csv diag.csv fleet.eval.json --out report").code == 0);
    for (const char* f : {"accuracy.csv", "scheduling.csv", "diagnosis.csv", "fig_rr_equilibrium.csv",
                          "fig_composition.csv", "manifest.json"})
        CHECK(fs::exists(workdir() / "report" / f));
    const auto m = nlohmann::json::parse(slurp(path("report/manifest.json")));
    CHECK(m["format"] == "nicperf-report");
    const auto first = slurp(path("report/accuracy.csv"));
    REQUIRE(cli("report --inputs e.csv diag.csv fleet.eval.json --out report").code == 0);
    CHECK(slurp(path("report/accuracy.csv")) == first);
}
