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
#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "nugap/errors.hpp"

namespace nugap::app {

using nlohmann::json;

namespace {

std::string escape_token(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// Read-only view of one JSON value that knows its pointer path.
class Node {
public:
    Node(const json& value, std::string path) : v_(&value), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(fmt::format("{}: {}", path_.empty() ? "/" : path_, msg));
    }

    const std::string& path() const { return path_; }
    const json& raw() const { return *v_; }

    void object(std::initializer_list<std::string_view> allowed) const {
        if (!v_->is_object()) fail("expected an object");
        for (const auto& [key, _] : v_->items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                Node((*v_)[key], child_path(key)).fail("unknown key");
        }
    }

    bool has(std::string_view key) const { return v_->contains(key); }

    Node at(std::string_view key) const {
        if (!v_->contains(key)) Node(*v_, child_path(key)).fail("required key is missing");
        return {(*v_)[std::string(key)], child_path(key)};
    }

    std::optional<Node> get(std::string_view key) const {
        if (!v_->contains(key)) return std::nullopt;
        return Node((*v_)[std::string(key)], child_path(key));
    }

    std::vector<Node> elements() const {
        if (!v_->is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < v_->size(); ++i) out.emplace_back((*v_)[i], fmt::format("{}/{}", path_, i));
        return out;
    }

    double number() const {
        if (!v_->is_number()) fail("expected a number");
        const double x = v_->get<double>();
        if (!std::isfinite(x)) fail("expected a finite number");
        return x;
    }

    double positive() const {
        const double x = number();
        if (!(x > 0.0)) fail("must be positive");
        return x;
    }

    double non_negative() const {
        const double x = number();
        if (x < 0.0) fail("must be non-negative");
        return x;
    }

    std::uint64_t unsigned_integer() const {
        if (v_->is_number_unsigned()) return v_->get<std::uint64_t>();
        if (v_->is_number_integer()) fail("must be non-negative");
        if (v_->is_number_float()) {
            const double x = v_->get<double>();
            if (x >= 0.0 && x < 0x1.0p53 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
        }
        fail("expected a non-negative integer");
    }

    int small_integer() const {
        const auto x = unsigned_integer();
        if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) fail("too large");
        return static_cast<int>(x);
    }

    std::string string() const {
        if (!v_->is_string()) fail("expected a string");
        return v_->get<std::string>();
    }

    template <class F>
    auto guarded(F&& f) const {
        try {
            return f();
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }

private:
    std::string child_path(std::string_view key) const { return fmt::format("{}/{}", path_, escape_token(key)); }

    const json* v_;
    std::string path_;
};

void set_double(const Node& n, std::string_view key, double& out) {
    if (auto c = n.get(key)) out = c->number();
}

void set_positive(const Node& n, std::string_view key, double& out) {
    if (auto c = n.get(key)) out = c->positive();
}

void set_non_negative(const Node& n, std::string_view key, double& out) {
    if (auto c = n.get(key)) out = c->non_negative();
}

void set_int(const Node& n, std::string_view key, int& out) {
    if (auto c = n.get(key)) out = c->small_integer();
}

void set_count(const Node& n, std::string_view key, std::size_t& out) {
    if (auto c = n.get(key)) out = static_cast<std::size_t>(c->unsigned_integer());
}

FrequencyRange parse_range(const Node& n) {
    n.object({"wmin", "wmax"});
    const double lo = n.at("wmin").non_negative();
    const double hi = n.at("wmax").positive();
    return n.guarded([&] { return FrequencyRange(lo, hi); });
}

Hyperparams parse_hyper(const Node& n, Hyperparams hp) {
    n.object({"signal_variance", "lengthscale", "noise_variance"});
    set_positive(n, "signal_variance", hp.signal_variance);
    set_positive(n, "lengthscale", hp.lengthscale);
    set_positive(n, "noise_variance", hp.noise_variance);
    return hp;
}

std::vector<double> number_list(const Node& n) {
    std::vector<double> out;
    for (const auto& e : n.elements()) out.push_back(e.number());
    return out;
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

NamedSystem parse_bank_entry(const Node& n) {
    n.object({"name", "alpha", "beta", "A", "B", "C", "D", "kp", "kd", "Ts"});
    const std::string name = n.at("name").string();
    if (!valid_name(name)) n.at("name").fail("names may use letters, digits, '_', '-' and '.'");
    double Ts = kSimSamplingTime;
    set_positive(n, "Ts", Ts);
    const double kp = n.at("kp").number();
    const double kd = n.at("kd").number();

    const bool family = n.has("alpha") || n.has("beta");
    const bool matrices = n.has("A") || n.has("B") || n.has("C") || n.has("D");
    if (family == matrices) n.fail("give either {alpha, beta} or {A, B, C, D}");

    auto build = [&]() -> NamedSystem {
        if (family) {
            const double alpha = n.at("alpha").number();
            const double beta = n.at("beta").number();
            return {name, ClosedLoopSystem(sim_plant(alpha, beta, Ts), PDController(kp, kd, Ts))};
        }
        const auto rows = n.at("A").elements();
        const auto order = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd A(order, order);
        for (Eigen::Index i = 0; i < order; ++i) {
            const auto row = number_list(rows[static_cast<std::size_t>(i)]);
            if (static_cast<Eigen::Index>(row.size()) != order)
                rows[static_cast<std::size_t>(i)].fail(fmt::format("expected {} entries", order));
            for (Eigen::Index j = 0; j < order; ++j) A(i, j) = row[static_cast<std::size_t>(j)];
        }
        auto vector_of = [&](std::string_view key) {
            const auto node = n.at(key);
            const auto values = number_list(node);
            if (static_cast<Eigen::Index>(values.size()) != order) node.fail(fmt::format("expected {} entries", order));
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(values.data(), order));
        };
        const Eigen::VectorXd B = vector_of("B");
        const Eigen::RowVectorXd C = vector_of("C").transpose();
        double D = 0.0;
        set_double(n, "D", D);
        return {name, ClosedLoopSystem(StateSpaceModel(A, B, C, D, Ts), PDController(kp, kd, Ts))};
    };
    return n.guarded(build);
}

void parse_selection(const Node& n, SelectionConfig& s, std::optional<std::uint64_t>& seed) {
    n.object({"range", "grid_size", "xi_explore", "max_iterations", "convergence", "probe", "seed", "n_restarts",
              "gp_init"});
    if (auto r = n.get("range")) s.range = parse_range(*r);
    set_count(n, "grid_size", s.grid_size);
    if (auto x = n.get("xi_explore")) s.xi_explore = x->non_negative();
    set_int(n, "max_iterations", s.max_iterations);
    set_int(n, "n_restarts", s.n_restarts);
    if (s.grid_size < 2) n.at("grid_size").fail("must be at least 2");
    if (s.max_iterations < 1) n.at("max_iterations").fail("must be at least 1");
    if (s.n_restarts < 1) n.at("n_restarts").fail("must be at least 1");
    if (auto g = n.get("gp_init")) s.gp_init = parse_hyper(*g, s.gp_init);
    if (auto c = n.get("convergence")) {
        c->object({"window", "psi_tol", "omega_tol_frac"});
        set_int(*c, "window", s.convergence.window);
        set_positive(*c, "psi_tol", s.convergence.psi_tol);
        set_non_negative(*c, "omega_tol_frac", s.convergence.omega_tol_frac);
        if (s.convergence.window < 1) c->at("window").fail("must be at least 1");
    }
    if (auto p = n.get("probe")) {
        p->object({"mode", "amplitude", "n_periods", "settle_fraction", "noise_std", "max_duration_s"});
        if (auto m = p->get("mode")) {
            const auto mode = m->string();
            if (mode == "analytic") s.probe.mode = ProbeMode::analytic;
            else if (mode == "timeseries") s.probe.mode = ProbeMode::timeseries;
            else m->fail("expected \"analytic\" or \"timeseries\"");
        }
        set_positive(*p, "amplitude", s.probe.settings.amplitude);
        set_int(*p, "n_periods", s.probe.settings.n_periods);
        set_non_negative(*p, "settle_fraction", s.probe.settings.settle_fraction);
        set_non_negative(*p, "noise_std", s.probe.settings.noise_std);
        set_positive(*p, "max_duration_s", s.probe.max_duration_s);
        if (s.probe.settings.n_periods < 8) p->at("n_periods").fail("must be at least 8");
        if (s.probe.settings.settle_fraction >= 1.0) p->at("settle_fraction").fail("must be below 1");
    }
    if (auto sd = n.get("seed")) seed = sd->unsigned_integer();
}

void parse_transfer(const Node& n, TransferSettings& t, const std::filesystem::path& base_dir) {
    n.object({"window", "hp0", "reoptimize_every", "n_restarts", "max_evaluations", "noise_std", "trajectories"});
    set_count(n, "window", t.tracking.window);
    if (t.tracking.window < 2) n.at("window").fail("must be at least 2");
    if (auto h = n.get("hp0")) t.tracking.hp0 = parse_hyper(*h, t.tracking.hp0);
    set_int(n, "reoptimize_every", t.tracking.reoptimize_every);
    set_int(n, "n_restarts", t.tracking.n_restarts);
    set_int(n, "max_evaluations", t.tracking.max_evaluations);
    set_non_negative(n, "noise_std", t.tracking.noise_std);
    if (t.tracking.n_restarts < 1) n.at("n_restarts").fail("must be at least 1");
    if (t.tracking.max_evaluations < 1) n.at("max_evaluations").fail("must be at least 1");

    if (auto tr = n.get("trajectories")) {
        auto& spec = t.trajectories;
        tr->object({"kind", "band", "count", "duration_s", "ramp_s", "amplitude", "n_components", "files"});
        if (auto k = tr->get("kind")) {
            spec.kind = k->string();
            if (spec.kind != "suite") k->guarded([&] { return parse_trajectory_kind(spec.kind); });
        }
        if (auto b = tr->get("band")) spec.band = parse_range(*b);
        set_count(*tr, "count", spec.count);
        set_positive(*tr, "duration_s", spec.duration_s);
        set_non_negative(*tr, "ramp_s", spec.ramp_s);
        set_positive(*tr, "amplitude", spec.amplitude);
        set_int(*tr, "n_components", spec.n_components);
        if (spec.count < 1) tr->at("count").fail("must be at least 1");
        if (spec.n_components < 1) tr->at("n_components").fail("must be at least 1");
        if (spec.ramp_s > spec.duration_s) tr->at("ramp_s").fail("longer than the trajectory");
        if (auto f = tr->get("files")) {
            for (const auto& e : f->elements()) {
                std::filesystem::path p = e.string();
                spec.files.push_back(p.is_absolute() ? p : base_dir / p);
            }
        }
        if (spec.kind == "waypoint_csv" && spec.files.empty()) tr->fail("waypoint_csv needs a non-empty 'files' list");
    }
}

std::size_t lookup(const Node& n, const std::vector<NamedSystem>& bank) {
    const auto name = n.string();
    for (std::size_t i = 0; i < bank.size(); ++i)
        if (bank[i].name == name) return i;
    n.fail(fmt::format("'{}' is not in the bank", name));
}

} // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_hash(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::vector<NamedSystem> ExperimentConfig::source_systems() const {
    std::vector<NamedSystem> out;
    for (auto i : sources) out.push_back(bank.at(i));
    return out;
}

std::uint64_t ExperimentConfig::bank_hash() const {
    const json roles{{"bank", document.at("bank")}, {"target", document.at("target")}, {"sources", document.at("sources")}};
    return fnv1a(roles.dump());
}

std::uint64_t ExperimentConfig::config_hash(std::uint64_t seed) const {
    return fnv1a(fmt::format("{}\nseed={}", document.dump(), seed));
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    try {
        cfg.document = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Convert the byte offset into a line and column.
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ConfigError(fmt::format("{}:{}: {}", line, col, msg));
    }

    const Node root(cfg.document, "");
    root.object({"bank", "target", "sources", "seed", "selection", "sweep", "transfer", "output_dir"});

    std::set<std::string> names;
    for (const auto& e : root.at("bank").elements()) {
        cfg.bank.push_back(parse_bank_entry(e));
        if (!names.insert(cfg.bank.back().name).second) e.at("name").fail("duplicate system name");
    }
    if (cfg.bank.empty()) root.at("bank").fail("bank is empty");

    cfg.target = lookup(root.at("target"), cfg.bank);
    const auto source_nodes = root.at("sources").elements();
    if (source_nodes.empty()) root.at("sources").fail("at least one source is required");
    std::set<std::size_t> seen;
    for (const auto& s : source_nodes) {
        const auto idx = lookup(s, cfg.bank);
        if (!seen.insert(idx).second) s.fail("listed twice");
        cfg.sources.push_back(idx);
    }
    const double Ts = cfg.bank[cfg.target].system.Ts();
    for (std::size_t i = 0; i < cfg.sources.size(); ++i)
        if (cfg.bank[cfg.sources[i]].system.Ts() != Ts)
            source_nodes[i].fail(fmt::format("Ts differs from the target's {} s", Ts));

    std::optional<std::uint64_t> top_seed;
    if (auto sd = root.get("seed")) top_seed = sd->unsigned_integer();
    std::optional<std::uint64_t> selection_seed;
    if (auto s = root.get("selection")) parse_selection(*s, cfg.selection, selection_seed);
    if (top_seed && selection_seed && *top_seed != *selection_seed)
        root.at("selection").at("seed").fail("conflicts with the top-level seed");
    cfg.seed = top_seed ? top_seed : selection_seed;

    if (cfg.selection.range.max() >= std::acos(-1.0) / Ts)
        root.at("selection").at("range").fail("upper bound must stay below the Nyquist frequency");

    if (auto sw = root.get("sweep")) {
        sw->object({"grid_size"});
        set_count(*sw, "grid_size", cfg.sweep_grid);
        if (cfg.sweep_grid < 100) sw->at("grid_size").fail("must be at least 100");
    }
    if (auto t = root.get("transfer")) parse_transfer(*t, cfg.transfer, base_dir);
    if (auto o = root.get("output_dir")) {
        cfg.output_dir = o->string();
        if (cfg.output_dir.empty()) o->fail("must not be empty");
        if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
    } else {
        cfg.output_dir = base_dir / "out";
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}:{}", path.string(), e.what()));
    }
}

std::vector<Trajectory> build_trajectories(const TrajectorySpec& spec, double Ts, std::uint64_t seed) {
    if (spec.kind == "suite") return default_trajectory_suite(spec.band, seed, Ts, spec.duration_s, spec.ramp_s);
    TrajectoryParams p;
    p.Ts = Ts;
    p.duration_s = spec.duration_s;
    p.ramp_s = spec.ramp_s;
    p.amplitude = spec.amplitude;
    p.n_components = spec.n_components;
    const auto kind = parse_trajectory_kind(spec.kind);
    if (kind != TrajectoryKind::waypoint_csv) return make_test_trajectories(kind, p, spec.band, spec.count, seed);
    std::vector<Trajectory> out;
    for (const auto& f : spec.files) {
        p.csv_path = f.string();
        for (auto& t : make_test_trajectories(kind, p, spec.band, 1, seed)) out.push_back(std::move(t));
    }
    return out;
}

} // namespace nugap::app
