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
#include "serialize.hpp"

#include <fmt/format.h>

#include "nugap/errors.hpp"

namespace nugap::app {

using nlohmann::json;

namespace {

json estimate_json(const SimilarityEstimate& e) {
    return {{"source_id", e.source_id}, {"psi_star", e.psi_star}, {"sigma_star", e.sigma_star}, {"omega_star", e.omega_star}};
}

SimilarityEstimate estimate_from(const json& j) {
    return {j.at("source_id").get<std::string>(), j.at("psi_star").get<double>(), j.at("sigma_star").get<double>(),
            j.at("omega_star").get<double>()};
}

template <class T, class F>
std::vector<T> list_from(const json& j, F&& f) {
    std::vector<T> out;
    for (const auto& e : j) out.push_back(f(e));
    return out;
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

json to_json(const Hyperparams& hp) {
    return {{"signal_variance", hp.signal_variance}, {"lengthscale", hp.lengthscale}, {"noise_variance", hp.noise_variance}};
}

Hyperparams hyperparams_from_json(const json& j) {
    return {j.at("signal_variance").get<double>(), j.at("lengthscale").get<double>(), j.at("noise_variance").get<double>()};
}

json to_json(const SelectionResult& r) {
    json history = json::array();
    for (const auto& rec : r.history) {
        json est = json::array();
        for (const auto& e : rec.estimates) est.push_back(estimate_json(e));
        json hps = json::array();
        for (const auto& hp : rec.hyperparams) hps.push_back(to_json(hp));
        history.push_back({{"iteration", rec.iteration},
                           {"omega", rec.omega},
                           {"psi", rec.psi},
                           {"estimates", est},
                           {"hyperparams", hps},
                           {"next_omega", rec.next_omega}});
    }
    json estimates = json::array();
    for (const auto& e : r.estimates) estimates.push_back(estimate_json(e));
    return {{"target_id", r.target_id},
            {"source_ids", r.source_ids},
            {"search_range", {{"wmin", r.search_range.min()}, {"wmax", r.search_range.max()}}},
            {"omegas", r.omegas},
            {"psi", r.psi},
            {"history", history},
            {"estimates", estimates},
            {"chosen", r.chosen},
            {"chosen_id", r.source_ids.empty() ? std::string() : r.chosen_id()},
            {"converged", r.converged},
            {"iterations", r.iterations}};
}

SelectionResult selection_from_json(const json& j) {
    try {
        SelectionResult r;
        r.target_id = j.at("target_id").get<std::string>();
        r.source_ids = j.at("source_ids").get<std::vector<std::string>>();
        r.search_range = FrequencyRange(j.at("search_range").at("wmin").get<double>(),
                                        j.at("search_range").at("wmax").get<double>());
        r.omegas = j.at("omegas").get<std::vector<double>>();
        r.psi = j.at("psi").get<std::vector<std::vector<double>>>();
        for (const auto& h : j.at("history")) {
            IterationRecord rec;
            rec.iteration = h.at("iteration").get<int>();
            rec.omega = h.at("omega").get<double>();
            rec.psi = h.at("psi").get<std::vector<double>>();
            rec.estimates = list_from<SimilarityEstimate>(h.at("estimates"), estimate_from);
            rec.hyperparams = list_from<Hyperparams>(h.at("hyperparams"), hyperparams_from_json);
            rec.next_omega = h.at("next_omega").get<double>();
            r.history.push_back(std::move(rec));
        }
        r.estimates = list_from<SimilarityEstimate>(j.at("estimates"), estimate_from);
        r.chosen = j.at("chosen").get<std::size_t>();
        r.converged = j.at("converged").get<bool>();
        r.iterations = j.at("iterations").get<int>();
        if (r.psi.size() != r.source_ids.size() || r.estimates.size() != r.source_ids.size() ||
            r.chosen >= r.source_ids.size())
            throw ConfigError("selection result is inconsistent");
        if (!r.history.empty()) {
            Eigen::MatrixXd X(static_cast<Eigen::Index>(r.omegas.size()), 1);
            for (std::size_t m = 0; m < r.omegas.size(); ++m) X(static_cast<Eigen::Index>(m), 0) = r.omegas[m];
            const auto& hps = r.history.back().hyperparams;
            for (std::size_t n = 0; n < r.source_ids.size(); ++n) {
                const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(r.psi[n].data(),
                                                                            static_cast<Eigen::Index>(r.psi[n].size()));
                r.models.push_back(GPModel::fit(X, y, zero_mean(), hps.at(n)));
            }
        }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed selection result: {}", e.what()));
    }
}

json to_json(const StudyReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"source_id", row.source_id},
                        {"psi_star_hat", optional_number(row.psi_star_hat)},
                        {"mean_rms", row.mean_rms},
                        {"mean_reduction_pct", row.mean_reduction_pct}});
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"source_id", c.source_id},
                         {"trajectory_id", c.trajectory_id},
                         {"baseline_rms", c.baseline_rms},
                         {"rms", c.rms},
                         {"reduction_pct", c.reduction_pct}});
    return {{"target_id", r.target_id},
            {"trajectory_ids", r.trajectory_ids},
            {"baseline_rms", r.baseline_rms},
            {"rows", rows},
            {"cells", cells},
            {"spearman", optional_number(r.spearman)},
            {"selected_id", r.selected_id},
            {"best_transfer_id", r.best_transfer_id}};
}

StudyReport study_from_json(const json& j) {
    try {
        StudyReport r;
        r.target_id = j.at("target_id").get<std::string>();
        r.trajectory_ids = j.at("trajectory_ids").get<std::vector<std::string>>();
        r.baseline_rms = j.at("baseline_rms").get<std::vector<double>>();
        for (const auto& row : j.at("rows"))
            r.rows.push_back({row.at("source_id").get<std::string>(), optional_from(row.at("psi_star_hat")),
                              row.at("mean_rms").get<double>(), row.at("mean_reduction_pct").get<double>()});
        for (const auto& c : j.at("cells"))
            r.cells.push_back({c.at("source_id").get<std::string>(), c.at("trajectory_id").get<std::string>(),
                               c.at("baseline_rms").get<double>(), c.at("rms").get<double>(),
                               c.at("reduction_pct").get<double>()});
        r.spearman = optional_from(j.at("spearman"));
        r.selected_id = j.at("selected_id").get<std::string>();
        r.best_transfer_id = j.at("best_transfer_id").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed transfer report: {}", e.what()));
    }
}

} // namespace nugap::app
