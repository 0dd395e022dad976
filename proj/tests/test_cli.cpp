/*
 Copyright 2026 The nugap Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "nugap/errors.hpp"
#include "serialize.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nugap;
using namespace nugap::app;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json bank_config() { return json::parse(slurp(fs::path(NUGAP_SOURCE_DIR) / "configs" / "sim_bank.json")); }

/// Fresh scratch directory holding config.json, with a short trajectory set.
struct Workspace {
    fs::path dir;
    fs::path config;

    explicit Workspace(const std::string& name, json doc = {}) {
        std::random_device rd;
        dir = fs::temp_directory_path() / fmt::format("nugap_cli_{}_{:x}", name, rd());
        fs::remove_all(dir);
        fs::create_directories(dir);
        config = dir / "config.json";
        if (doc.is_null()) {
            doc = bank_config();
            doc["transfer"]["trajectories"] = {{"kind", "sum_of_sines"}, {"count", 2}, {"duration_s", 9.0}, {"ramp_s", 1.5}};
        }
        doc["output_dir"] = "out";
        write(doc);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    void write(const json& doc) const { std::ofstream(config) << doc.dump(2); }
    void write_text(const std::string& text) const { std::ofstream(config) << text; }
    fs::path out() const { return dir / "out"; }

    int run(std::vector<std::string> args) const {
        args.insert(args.begin() + 1, {"--config", config.string()});
        return run_cli(args);
    }
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string f;
        std::istringstream ls(line);
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(fields);
    }
    return rows;
}

} // namespace

TEST_CASE("configs/sim_bank.json parses into the four-system bank") {
    const auto cfg = load_config(fs::path(NUGAP_SOURCE_DIR) / "configs" / "sim_bank.json");
    CHECK(cfg.target_system().name == "T");
    REQUIRE(cfg.sources.size() == 3);
    CHECK(cfg.source_systems()[1].name == "S2");
    CHECK(cfg.target_system().system.model() == testing::bank_target().system.model());
    CHECK_FALSE(cfg.seed.has_value());
    CHECK(cfg.transfer.tracking.window == 50);
    CHECK(cfg.selection.range.max() == 10.0);
    CHECK(cfg.config_hash(1) != cfg.config_hash(2));
    CHECK(hex_hash(cfg.bank_hash()).size() == 16);
}

TEST_CASE("fnv1a matches published vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex_hash(0xabcULL) == "0000000000000abc");
}

TEST_CASE("config errors point at the problem") {
    try {
        parse_config("{\n  \"bank\": [\n  }");
        FAIL("expected a syntax error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("3:", 0) == 0);
    }
    auto doc = bank_config();
    doc["selection"]["grid_sise"] = 10;
    try {
        parse_config(doc.dump());
        FAIL("expected a schema error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/selection") != std::string::npos);
    }
    doc = bank_config();
    doc["sources"] = json::array();
    CHECK_THROWS_AS(parse_config(doc.dump()), ConfigError);
    doc = bank_config();
    doc["target"] = "nope";
    CHECK_THROWS_AS(parse_config(doc.dump()), ConfigError);
    doc = bank_config();
    doc["seed"] = 1;
    doc["selection"]["seed"] = 2;
    CHECK_THROWS_AS(parse_config(doc.dump()), ConfigError);
}

TEST_CASE("exit codes") {
    SUBCASE("empty source list") {
        auto doc = bank_config();
        doc["sources"] = json::array();
        Workspace ws("nosrc", doc);
        CHECK(ws.run({"select", "--seed", "1"}) == kExitConfig);
    }
    SUBCASE("missing seed") {
        Workspace ws("noseed");
        CHECK(ws.run({"select"}) == kExitConfig);
        CHECK(ws.run({"transfer"}) == kExitConfig);
        // The sweep is deterministic and needs none.
        CHECK(ws.run({"sweep"}) == kExitOk);
    }
    SUBCASE("malformed JSON") {
        Workspace ws("badjson");
        ws.write_text("{\"bank\": [");
        CHECK(ws.run({"sweep"}) == kExitConfig);
    }
    SUBCASE("command line errors") {
        CHECK(run_cli({}) == kExitConfig);
        CHECK(run_cli({"select"}) == kExitConfig);
        CHECK(run_cli({"select", "--config", "/nonexistent.json", "--seed", "1"}) == kExitConfig);
        Workspace ws("badflag");
        CHECK(ws.run({"select", "--seed", "x"}) == kExitConfig);
        CHECK(ws.run({"select", "--seed", "1", "--probe-mode", "magic"}) == kExitConfig);
    }
    SUBCASE("transfer without a selection") {
        Workspace ws("nosel");
        CHECK(ws.run({"transfer", "--seed", "1"}) == kExitConfig);
    }
    SUBCASE("stale selection") {
        Workspace ws("stale");
        CHECK(ws.run({"select", "--seed", "1"}) == kExitOk);
        auto doc = json::parse(slurp(ws.config));
        doc["bank"][2]["alpha"] = 0.96;
        ws.write(doc);
        CHECK(ws.run({"transfer", "--seed", "1"}) == kExitConfig);
        CHECK_FALSE(fs::exists(ws.out() / "transfer_report.json"));
    }
}

TEST_CASE("pipeline reruns are byte-identical") {
    Workspace a("rerun_a"), b("rerun_b");
    for (const auto* ws : {&a, &b}) {
        CHECK(ws->run({"sweep", "--seed", "7"}) == kExitOk);
        CHECK(ws->run({"select", "--seed", "7"}) == kExitOk);
        CHECK(ws->run({"transfer", "--seed", "7"}) == kExitOk);
        CHECK(ws->run({"report"}) == kExitOk);
    }
    const auto sa = snapshot(a.out());
    const auto sb = snapshot(b.out());
    CHECK(sa.size() >= 10);
    CHECK(sa == sb);
    for (const char* f : {"sweep_summary.json", "sweep_T_S1.csv", "selection_result.json", "samples.csv",
                          "posterior_T_S2.csv", "transfer_report.json", "transfer_table.csv", "report.json",
                          "report.txt"})
        CHECK_MESSAGE(sa.count(f) == 1, f);
    // Same inputs into the same directory leave every file unchanged.
    CHECK(a.run({"select", "--seed", "7"}) == kExitOk);
    CHECK(snapshot(a.out()) == sa);
}

TEST_CASE("artifacts carry provenance and consistent contents") {
    Workspace ws("content");
    REQUIRE(ws.run({"select", "--seed", "3"}) == kExitOk);
    REQUIRE(ws.run({"transfer", "--seed", "3"}) == kExitOk);
    const auto sel = json::parse(slurp(ws.out() / "selection_result.json"));
    const auto cfg = load_config(ws.config);
    CHECK(sel.at("tool") == "nugap");
    CHECK(sel.at("seed") == 3);
    CHECK(sel.at("bank_hash") == hex_hash(cfg.bank_hash()));
    CHECK(sel.at("config_hash") == hex_hash(cfg.config_hash(3)));
    CHECK(sel.at("result").at("chosen_id") == "S2");

    const auto samples = read_csv(ws.out() / "samples.csv");
    CHECK(samples.front() == std::vector<std::string>{"iter", "omega", "source_id", "psi", "psi_star_hat",
                                                      "sigma_star_hat"});
    CHECK((samples.size() - 1) % 3 == 0);

    const auto table = read_csv(ws.out() / "transfer_table.csv");
    REQUIRE(table.size() == 5);
    CHECK(table[0] == std::vector<std::string>{"source_id", "psi_star_hat", "mean_rms", "mean_reduction_pct"});
    CHECK(table.back()[0] == "none");
    CHECK(table.back()[1].empty());
    // Ordering the sources by similarity also orders them by tracking error.
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 1; i + 1 < table.size(); ++i) rows.emplace_back(std::stod(table[i][1]), std::stod(table[i][2]));
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].second < rows[i].second);
}

TEST_CASE("time-series probing selects the same source") {
    Workspace ws("modes");
    REQUIRE(ws.run({"select", "--seed", "4"}) == kExitOk);
    const auto analytic = json::parse(slurp(ws.out() / "selection_result.json"));
    REQUIRE(ws.run({"select", "--seed", "4", "--probe-mode", "timeseries", "--out", (ws.dir / "ts").string()}) == kExitOk);
    const auto series = json::parse(slurp(ws.dir / "ts" / "selection_result.json"));
    CHECK(series.at("probe_mode") == "timeseries");
    CHECK(analytic.at("result").at("chosen_id") == series.at("result").at("chosen_id"));
}

TEST_CASE("report lists missing artifacts and is idempotent") {
    Workspace ws("report");
    REQUIRE(ws.run({"select", "--seed", "2"}) == kExitOk);
    REQUIRE(ws.run({"report"}) == kExitOk);
    const auto first = snapshot(ws.out());
    const auto rep = json::parse(first.at("report.json"));
    CHECK(rep.at("missing") == json::array({"sweep_summary.json", "transfer_report.json"}));
    CHECK(rep.at("artifact_config_hashes").contains("select"));
    CHECK(first.at("report.txt").find("Missing:") != std::string::npos);
    REQUIRE(ws.run({"report"}) == kExitOk);
    CHECK(snapshot(ws.out()) == first);
    // Reports can be built from a bare directory.
    CHECK(run_cli({"report", "--out", ws.out().string()}) == kExitOk);
    CHECK(snapshot(ws.out()) == first);
}

TEST_CASE("selection results survive serialization") {
    SelectionConfig c;
    c.seed = 8;
    const auto r = run_selection(testing::bank_target(), testing::bank_sources(), c);
    const auto back = selection_from_json(json::parse(to_json(r).dump()));
    CHECK(back.source_ids == r.source_ids);
    CHECK(back.omegas == r.omegas);
    CHECK(back.psi == r.psi);
    CHECK(back.chosen == r.chosen);
    CHECK(back.converged == r.converged);
    CHECK(back.iterations == r.iterations);
    REQUIRE(back.history.size() == r.history.size());
    CHECK(back.history.back().hyperparams == r.history.back().hyperparams);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(back.estimates[n].psi_star == r.estimates[n].psi_star);
        Eigen::VectorXd x(1);
        x << 4.2;
        CHECK(back.models[n].predict(x).mean == doctest::Approx(r.models[n].predict(x).mean).epsilon(1e-12));
    }
    CHECK(to_json(back).dump() == to_json(r).dump());
}

TEST_CASE("study reports survive serialization") {
    StudyReport r;
    r.target_id = "T";
    r.trajectory_ids = {"a", "b"};
    r.baseline_rms = {0.1, 0.2};
    r.rows = {{"S1", 0.07, 0.01, 90.0}, {"none", std::nullopt, 0.02, 80.0}};
    r.cells = {{"S1", "a", 0.1, 0.01, 90.0}};
    r.spearman = std::nullopt;
    r.selected_id = "S1";
    r.best_transfer_id = "S1";
    CHECK(study_from_json(json::parse(to_json(r).dump())) == r);
    r.spearman = 1.0 / 3.0;
    CHECK(study_from_json(json::parse(to_json(r).dump())) == r);
    CHECK(to_json(r).at("rows")[1].at("psi_star_hat").is_null());
}
