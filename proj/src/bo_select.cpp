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
#include "nugap/bo_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "nugap/errors.hpp"
#include "nugap/similarity.hpp"
#include "seeding.hpp"

namespace nugap {

namespace {

constexpr std::uint64_t kStreamInit = 0;
constexpr std::uint64_t kStreamProbe = 1;
constexpr std::uint64_t kStreamHyper = 1u << 20;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Eigen::MatrixXd column(const std::vector<double>& v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        m(static_cast<Eigen::Index>(i), 0) = v[i];
    }
    return m;
}

Eigen::VectorXd vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

double expected_improvement(double mean, double sigma, double best, double xi_explore) {
    if (!(sigma > 0.0)) {
        return 0.0;
    }
    const double gain = mean - best - xi_explore;
    const double z = gain / sigma;
    return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

SimilarityEstimate similarity_estimate(const GPModel& model, const FrequencyRange& range, std::size_t grid_size,
                                       std::string source_id) {
    if (model.size() == 0) {
        throw ConfigError("similarity estimate needs a GP fitted on at least one sample");
    }
    if (grid_size < 2) {
        throw ConfigError("similarity estimate needs at least two grid points");
    }
    SimilarityEstimate best{std::move(source_id), -std::numeric_limits<double>::infinity(), 0.0, range.min()};
    Eigen::VectorXd x(1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        x(0) = range.grid_point(i, grid_size);
        const Prediction p = model.predict(x);
        if (p.mean > best.psi_star) {
            best.psi_star = p.mean;
            best.sigma_star = std::sqrt(p.variance);
            best.omega_star = x(0);
        }
    }
    best.psi_star = std::clamp(best.psi_star, 0.0, 1.0);
    return best;
}

double multi_source_acquisition(std::span<const GPModel> models, std::span<const SimilarityEstimate> estimates,
                                const FrequencyRange& range, std::size_t grid_size, double xi_explore) {
    if (models.empty() || models.size() != estimates.size()) {
        throw ConfigError("acquisition needs one estimate per source model");
    }
    std::vector<double> scale(models.size());
    std::vector<double> incumbent(models.size());
    for (std::size_t n = 0; n < models.size(); ++n) {
        if (estimates[n].psi_star < kSimilarityFloor) {
            spdlog::debug("acquisition: estimate {} for '{}' below floor {}", estimates[n].psi_star,
                          estimates[n].source_id, kSimilarityFloor);
        }
        scale[n] = 1.0 / std::max(estimates[n].psi_star, kSimilarityFloor);
        incumbent[n] = models[n].size() > 0 ? models[n].targets().maxCoeff() : 0.0;
    }
    double best_value = -1.0;
    double best_omega = range.min();
    Eigen::VectorXd x(1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        x(0) = range.grid_point(i, grid_size);
        double value = 0.0;
        for (std::size_t n = 0; n < models.size(); ++n) {
            const Prediction p = models[n].predict(x);
            value = std::max(value, scale[n] * expected_improvement(p.mean, std::sqrt(p.variance), incumbent[n],
                                                                    xi_explore));
        }
        if (value > best_value) {
            best_value = value;
            best_omega = x(0);
        }
    }
    return best_omega;
}

FrequencyRange effective_range(const FrequencyRange& range, const ProbeConfig& probe, double Ts) {
    if (!(range.max() < std::numbers::pi / Ts)) {
        throw ConfigError(fmt::format("frequency range upper bound {} rad/s is not below Nyquist {} rad/s",
                                      range.max(), std::numbers::pi / Ts));
    }
    if (probe.mode == ProbeMode::analytic) {
        return range;
    }
    if (!(probe.max_duration_s > 0.0)) {
        throw ConfigError("probe max_duration_s must be positive");
    }
    const double resolution = 2.0 * std::numbers::pi * probe.settings.n_periods / probe.max_duration_s;
    const double lo = std::max(range.min(), resolution);
    if (!(lo < range.max())) {
        throw ConfigError(fmt::format("probe duration limit leaves no usable band: lowest frequency {} rad/s >= "
                                      "{} rad/s",
                                      lo, range.max()));
    }
    return {lo, range.max()};
}

ComplexResponse measure_response(const ClosedLoopSystem& system, double omega, const ProbeConfig& probe,
                                 std::uint64_t seed) {
    if (probe.mode == ProbeMode::analytic) {
        return frequency_response(system.model(), omega);
    }
    return estimate_response(run_probe(system, omega, probe.settings, seed));
}

std::size_t select_source(std::span<const double> psi_star) {
    if (psi_star.empty()) {
        throw ConfigError("selection needs at least one source");
    }
    return static_cast<std::size_t>(std::distance(psi_star.begin(), std::min_element(psi_star.begin(), psi_star.end())));
}

SelectionResult run_selection(const NamedSystem& target, std::span<const NamedSystem> sources,
                              const SelectionConfig& config) {
    if (sources.empty()) {
        throw ConfigError("selection needs at least one source system");
    }
    for (const auto& s : sources) {
        if (s.system.Ts() != target.system.Ts()) {
            throw ConfigError(fmt::format("source '{}' has Ts {} but target '{}' has Ts {}", s.name, s.system.Ts(),
                                          target.name, target.system.Ts()));
        }
    }
    if (config.max_iterations < 1 || config.convergence.window < 1 || config.grid_size < 2) {
        throw ConfigError("selection needs max_iterations >= 1, convergence window >= 1 and grid_size >= 2");
    }
    const FrequencyRange range = effective_range(config.range, config.probe, target.system.Ts());
    const HyperBounds bounds = config.gp_bounds.value_or(HyperBounds::for_input_width(range.width()));
    const std::size_t N = sources.size();

    SelectionResult result;
    result.target_id = target.name;
    result.search_range = range;
    result.psi.assign(N, {});
    for (const auto& s : sources) {
        result.source_ids.push_back(s.name);
    }
    std::vector<Hyperparams> hyper(N, config.gp_init);
    std::vector<SimilarityEstimate> previous;

    std::mt19937_64 init_rng(detail::derive_seed(config.seed, kStreamInit, 0));
    double omega = std::uniform_real_distribution<double>(range.min(), range.max())(init_rng);
    int streak = 0;

    for (int it = 1; it <= config.max_iterations; ++it) {
        const auto index = static_cast<std::uint64_t>(it);
        IterationRecord record;
        record.iteration = it;
        record.omega = omega;

        ComplexResponse z_target;
        try {
            z_target = measure_response(target.system, omega, config.probe,
                                        detail::derive_seed(config.seed, kStreamProbe, index));
        } catch (const Error& e) {
            throw NumericalError(fmt::format("iteration {}: probing target '{}' at {} rad/s failed: {}", it,
                                             target.name, omega, e.what()));
        }
        result.omegas.push_back(omega);

        std::vector<GPModel> models;
        models.reserve(N);
        for (std::size_t n = 0; n < N; ++n) {
            ComplexResponse z_source;
            try {
                z_source = measure_response(sources[n].system, omega, config.probe,
                                            detail::derive_seed(config.seed, kStreamProbe + 1 + n, index));
            } catch (const Error& e) {
                throw NumericalError(fmt::format("iteration {}: probing source '{}' at {} rad/s failed: {}", it,
                                                 sources[n].name, omega, e.what()));
            }
            const double psi = chordal_distance(z_target, z_source);
            result.psi[n].push_back(psi);
            record.psi.push_back(psi);

            const Eigen::MatrixXd X = column(result.omegas);
            const Eigen::VectorXd y = vec(result.psi[n]);
            if (y.size() >= 2) {
                HyperSearch search;
                search.n_restarts = config.n_restarts;
                search.seed = detail::derive_seed(config.seed, kStreamHyper + n, index);
                search.initial = hyper[n];
                hyper[n] = optimize_hyperparameters(X, y, zero_mean(), bounds, search);
            }
            models.push_back(GPModel::fit(X, y, zero_mean(), hyper[n]));
            record.hyperparams.push_back(hyper[n]);
        }

        std::vector<SimilarityEstimate> estimates;
        for (std::size_t n = 0; n < N; ++n) {
            estimates.push_back(similarity_estimate(models[n], range, config.grid_size, sources[n].name));
        }
        const double next = multi_source_acquisition(models, estimates, range, config.grid_size, config.xi_explore);

        bool steady = !previous.empty();
        for (std::size_t n = 0; steady && n < N; ++n) {
            steady = std::abs(estimates[n].psi_star - previous[n].psi_star) < config.convergence.psi_tol;
        }
        const double tol = config.convergence.omega_tol_frac * range.width();
        const bool revisits = std::any_of(result.omegas.begin(), result.omegas.end(),
                                          [&](double w) { return std::abs(w - next) <= tol; });
        streak = (steady && revisits) ? streak + 1 : 0;

        record.estimates = estimates;
        record.next_omega = next;
        result.history.push_back(std::move(record));
        result.models = std::move(models);
        result.estimates = estimates;
        result.iterations = it;
        previous = std::move(estimates);

        if (streak >= config.convergence.window) {
            result.converged = true;
            break;
        }
        omega = next;
    }

    std::vector<double> psi_star;
    for (const auto& e : result.estimates) {
        psi_star.push_back(e.psi_star);
    }
    result.chosen = select_source(psi_star);
    if (!result.converged) {
        spdlog::warn("selection did not converge within {} iterations", config.max_iterations);
    }
    return result;
}

} // namespace nugap
