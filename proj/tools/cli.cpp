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
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "nugap/errors.hpp"
#include "nugap/similarity.hpp"
#include "serialize.hpp"

namespace nugap::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string probe_mode;
    std::string selection;
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(fmt::format("cannot write '{}'", path.string()));
    f << content;
    if (!f) throw Error(fmt::format("failed writing '{}'", path.string()));
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::optional<json> read_json(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return std::nullopt;
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

std::string num(double x) { return fmt::format("{:.9g}", x); }

fs::path output_dir(const Options& o, const ExperimentConfig& cfg) { return o.out.empty() ? cfg.output_dir : fs::path(o.out); }

std::uint64_t require_seed(const Options& o, const ExperimentConfig& cfg) {
    if (o.seed) return *o.seed;
    if (cfg.seed) return *cfg.seed;
    throw ConfigError("no seed given: pass --seed <u64> or set \"seed\" in the config, runs are never seeded implicitly");
}

json header(const std::string& command, const ExperimentConfig& cfg, std::optional<std::uint64_t> seed) {
    return {{"tool", "nugap"},
            {"version", kVersion},
            {"command", command},
            {"config_hash", hex_hash(cfg.config_hash(seed.value_or(0)))},
            {"bank_hash", hex_hash(cfg.bank_hash())},
            {"seed", seed ? json(*seed) : json(nullptr)}};
}

std::string pair_name(const std::string& target, const std::string& source) { return target + "_" + source; }

int cmd_sweep(const Options& o) {
    const auto cfg = load_config(o.config);
    std::optional<std::uint64_t> seed = o.seed ? o.seed : cfg.seed;
    const fs::path dir = output_dir(o, cfg);
    const auto& target = cfg.target_system();
    const auto& range = cfg.selection.range;

    json summary = header("sweep", cfg, seed);
    summary["target"] = target.name;
    summary["range"] = {{"wmin", range.min()}, {"wmax", range.max()}};
    summary["grid_size"] = cfg.sweep_grid;
    json pairs = json::array();
    for (const auto& source : cfg.source_systems()) {
        const auto sweep = gap_sweep(target.system.model(), source.system.model(), range, cfg.sweep_grid);
        std::string csv = "omega,psi_true\n";
        for (std::size_t i = 0; i < sweep.omega.size(); ++i) csv += num(sweep.omega[i]) + "," + num(sweep.psi[i]) + "\n";
        const std::string file = fmt::format("sweep_{}.csv", pair_name(target.name, source.name));
        write_file(dir / file, csv);
        pairs.push_back({{"source", source.name},
                         {"psi_max", sweep.psi_max},
                         {"omega_at_max", sweep.omega_at_max},
                         {"file", file}});
        std::cout << fmt::format("{} vs {}: max psi {:.6f} at {:.4f} rad/s\n", target.name, source.name,
                                 sweep.psi_max, sweep.omega_at_max);
    }
    summary["pairs"] = pairs;
    write_json(dir / "sweep_summary.json", summary);
    return kExitOk;
}

int cmd_select(const Options& o) {
    auto cfg = load_config(o.config);
    const std::uint64_t seed = require_seed(o, cfg);
    if (!o.probe_mode.empty())
        cfg.selection.probe.mode = o.probe_mode == "timeseries" ? ProbeMode::timeseries : ProbeMode::analytic;
    cfg.selection.seed = seed;
    const fs::path dir = output_dir(o, cfg);
    const auto& target = cfg.target_system();
    const auto sources = cfg.source_systems();

    const auto result = run_selection(target, sources, cfg.selection);

    json doc = header("select", cfg, seed);
    doc["probe_mode"] = cfg.selection.probe.mode == ProbeMode::analytic ? "analytic" : "timeseries";
    doc["result"] = to_json(result);
    write_json(dir / "selection_result.json", doc);

    std::string samples = "iter,omega,source_id,psi,psi_star_hat,sigma_star_hat\n";
    for (const auto& rec : result.history)
        for (std::size_t n = 0; n < sources.size(); ++n)
            samples += fmt::format("{},{},{},{},{},{}\n", rec.iteration, num(rec.omega), sources[n].name,
                                   num(rec.psi[n]), num(rec.estimates[n].psi_star), num(rec.estimates[n].sigma_star));
    write_file(dir / "samples.csv", samples);

    const auto grid = result.search_range.grid(cfg.selection.grid_size);
    for (std::size_t n = 0; n < sources.size(); ++n) {
        std::string csv = "omega,mean,std\n";
        Eigen::VectorXd x(1);
        for (double w : grid) {
            x(0) = w;
            const auto p = result.models[n].predict(x);
            csv += num(w) + "," + num(p.mean) + "," + num(std::sqrt(p.variance)) + "\n";
        }
        write_file(dir / fmt::format("posterior_{}.csv", pair_name(target.name, sources[n].name)), csv);
    }

    for (const auto& e : result.estimates)
        std::cout << fmt::format("{}: psi* {:.6f} (sigma {:.2e}) at {:.4f} rad/s\n", e.source_id, e.psi_star,
                                 e.sigma_star, e.omega_star);
    std::cout << fmt::format("chosen {} after {} iterations{}\n", result.chosen_id(), result.iterations,
                             result.converged ? "" : " (not converged)");
    return kExitOk;
}

int cmd_transfer(const Options& o) {
    const auto cfg = load_config(o.config);
    const std::uint64_t seed = require_seed(o, cfg);
    const fs::path dir = output_dir(o, cfg);
    const fs::path selection_path = o.selection.empty() ? dir / "selection_result.json" : fs::path(o.selection);
    const auto sel_doc = read_json(selection_path);
    if (!sel_doc) throw ConfigError(fmt::format("no selection result at '{}', run 'select' first", selection_path.string()));
    const std::string expected = hex_hash(cfg.bank_hash());
    const std::string recorded = sel_doc->value("bank_hash", std::string());
    if (recorded != expected)
        throw ConfigError(fmt::format("'{}' is stale: it was produced for bank {} but the config has bank {}",
                                      selection_path.string(), recorded.empty() ? "?" : recorded, expected));
    if (!sel_doc->contains("result")) throw ConfigError(fmt::format("'{}' has no result", selection_path.string()));
    const auto selection = selection_from_json(sel_doc->at("result"));

    const auto& target = cfg.target_system();
    const auto sources = cfg.source_systems();
    const auto trajectories = build_trajectories(cfg.transfer.trajectories, target.system.Ts(), seed);
    StudyConfig study;
    study.tracking = cfg.transfer.tracking;
    study.seed = seed;
    const auto report = run_transfer_study(target, sources, trajectories, selection, study);

    json doc = header("transfer", cfg, seed);
    doc["selection_config_hash"] = sel_doc->value("config_hash", std::string());
    doc["report"] = to_json(report);
    write_json(dir / "transfer_report.json", doc);

    std::string table = "source_id,psi_star_hat,mean_rms,mean_reduction_pct\n";
    for (const auto& row : report.rows)
        table += fmt::format("{},{},{},{}\n", row.source_id, row.psi_star_hat ? num(*row.psi_star_hat) : "",
                             num(row.mean_rms), num(row.mean_reduction_pct));
    write_file(dir / "transfer_table.csv", table);
    std::string cells = "source_id,trajectory_id,baseline_rms,rms,reduction_pct\n";
    for (const auto& c : report.cells)
        cells += fmt::format("{},{},{},{},{}\n", c.source_id, c.trajectory_id, num(c.baseline_rms), num(c.rms),
                             num(c.reduction_pct));
    write_file(dir / "transfer_cells.csv", cells);

    for (const auto& row : report.rows)
        std::cout << fmt::format("{:>8}  psi* {:>10}  mean RMS {:.6f}  reduction {:.2f}%\n", row.source_id,
                                 row.psi_star_hat ? fmt::format("{:.6f}", *row.psi_star_hat) : "-", row.mean_rms,
                                 row.mean_reduction_pct);
    std::cout << fmt::format("spearman {}  selected {}  best transfer {}\n",
                             report.spearman ? fmt::format("{:.3f}", *report.spearman) : "n/a", report.selected_id,
                             report.best_transfer_id);
    return kExitOk;
}

int cmd_report(const Options& o) {
    fs::path dir = o.out;
    if (dir.empty()) {
        if (o.config.empty()) throw ConfigError("report needs --out <dir> or --config");
        dir = load_config(o.config).output_dir;
    }
    const auto sweep = read_json(dir / "sweep_summary.json");
    const auto select = read_json(dir / "selection_result.json");
    const auto transfer = read_json(dir / "transfer_report.json");

    json doc{{"tool", "nugap"}, {"version", kVersion}, {"command", "report"}};
    json hashes = json::object();
    json missing = json::array();
    std::string text;
    const json* primary = select ? &*select : transfer ? &*transfer : sweep ? &*sweep : nullptr;
    doc["config_hash"] = primary ? json(primary->value("config_hash", std::string())) : json(nullptr);

    if (sweep) {
        hashes["sweep"] = sweep->value("config_hash", std::string());
        doc["sweep"] = {{"target", sweep->value("target", std::string())}, {"pairs", sweep->value("pairs", json::array())}};
        text += "Dense sweep maxima\n";
        for (const auto& p : doc["sweep"]["pairs"])
            text += fmt::format("  {:<8} psi_max {:.6f} at {:.4f} rad/s\n", p.value("source", std::string()),
                                p.value("psi_max", 0.0), p.value("omega_at_max", 0.0));
    } else {
        missing.push_back("sweep_summary.json");
    }
    if (select) {
        hashes["select"] = select->value("config_hash", std::string());
        const auto& r = select->at("result");
        doc["selection"] = {{"chosen_id", r.value("chosen_id", std::string())},
                            {"converged", r.value("converged", false)},
                            {"iterations", r.value("iterations", 0)},
                            {"estimates", r.value("estimates", json::array())}};
        text += fmt::format("Selection: {} ({} iterations, {})\n", r.value("chosen_id", std::string()),
                            r.value("iterations", 0), r.value("converged", false) ? "converged" : "not converged");
        for (const auto& e : doc["selection"]["estimates"])
            text += fmt::format("  {:<8} psi* {:.6f} at {:.4f} rad/s\n", e.value("source_id", std::string()),
                                e.value("psi_star", 0.0), e.value("omega_star", 0.0));
    } else {
        missing.push_back("selection_result.json");
    }
    if (transfer) {
        hashes["transfer"] = transfer->value("config_hash", std::string());
        const auto& r = transfer->at("report");
        doc["transfer"] = {{"rows", r.value("rows", json::array())},
                           {"spearman", r.value("spearman", json(nullptr))},
                           {"selected_id", r.value("selected_id", std::string())},
                           {"best_transfer_id", r.value("best_transfer_id", std::string())}};
        text += "Transfer\n";
        for (const auto& row : doc["transfer"]["rows"]) {
            const auto& psi = row.at("psi_star_hat");
            text += fmt::format("  {:<8} psi* {:>10} mean RMS {:.6f} reduction {:.2f}%\n",
                                row.value("source_id", std::string()),
                                psi.is_number() ? fmt::format("{:.6f}", psi.get<double>()) : "-",
                                row.value("mean_rms", 0.0), row.value("mean_reduction_pct", 0.0));
        }
        const auto& rho = doc["transfer"]["spearman"];
        text += fmt::format("  ranking correlation {}\n",
                            rho.is_number() ? fmt::format("{:.3f}", rho.get<double>()) : "n/a");
        text += fmt::format("  most similar {}, best transfer {}\n", r.value("selected_id", std::string()),
                            r.value("best_transfer_id", std::string()));
    } else {
        missing.push_back("transfer_report.json");
    }
    doc["artifact_config_hashes"] = hashes;
    doc["missing"] = missing;
    if (!missing.empty()) {
        text += "Missing:";
        for (const auto& m : missing) text += " " + m.get<std::string>();
        text += "\n";
    }
    write_json(dir / "report.json", doc);
    write_file(dir / "report.txt", text);
    std::cout << text;
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Frequency-domain similarity for selecting transfer-learning sources", "nugap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    Options o;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        if (config_required) c->required();
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--out", o.out, "Output directory (overrides output_dir)");
    };
    auto* sweep = app.add_subcommand("sweep", "Dense chordal-distance sweep of every target/source pair");
    add_common(sweep, true);
    auto* select = app.add_subcommand("select", "Bayesian-optimization source selection");
    add_common(select, true);
    select->add_option("--probe-mode", o.probe_mode, "analytic or timeseries")
        ->check(CLI::IsMember({"analytic", "timeseries"}));
    auto* transfer = app.add_subcommand("transfer", "Online inverse-dynamics transfer study");
    add_common(transfer, true);
    transfer->add_option("--selection", o.selection, "selection_result.json (default: <out>/selection_result.json)");
    auto* report = app.add_subcommand("report", "Merge artifacts into report.json and report.txt");
    add_common(report, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    auto logger = spdlog::get("nugap");
    if (!logger) logger = spdlog::stderr_color_mt("nugap");
    spdlog::set_default_logger(logger);
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        if (*sweep) return cmd_sweep(o);
        if (*select) return cmd_select(o);
        if (*transfer) return cmd_transfer(o);
        return cmd_report(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace nugap::app
