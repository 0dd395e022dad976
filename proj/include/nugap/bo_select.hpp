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
#ifndef NUGAP_BO_SELECT_HPP
#define NUGAP_BO_SELECT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nugap/freq_probe.hpp"
#include "nugap/gp.hpp"
#include "nugap/lti.hpp"
#include "nugap/response.hpp"

namespace nugap {

struct NamedSystem {
    std::string name;
    ClosedLoopSystem system;
};

enum class ProbeMode { analytic, timeseries };

struct ProbeConfig {
    ProbeMode mode = ProbeMode::analytic;
    ProbeSettings settings;
    /// Longest experiment allowed; bounds the lowest probe frequency in time-series mode.
    double max_duration_s = 600.0;
};

struct ConvergenceConfig {
    int window = 3;
    double psi_tol = 1e-3;
    double omega_tol_frac = 0.03;
};

struct SelectionConfig {
    FrequencyRange range{0.0, 10.0};
    std::size_t grid_size = 1000;
    double xi_explore = 0.0;
    int max_iterations = 30;
    ConvergenceConfig convergence;
    ProbeConfig probe;
    /// Used while a source has a single sample; afterwards the evidence is maximized.
    Hyperparams gp_init{0.01, 1.0, 1e-6};
    std::optional<HyperBounds> gp_bounds;
    int n_restarts = 3;
    std::uint64_t seed = 0;
};

struct SimilarityEstimate {
    std::string source_id;
    double psi_star = 0.0;
    double sigma_star = 0.0;
    double omega_star = 0.0;
};

struct IterationRecord {
    int iteration = 0;
    double omega = 0.0;
    std::vector<double> psi;
    std::vector<SimilarityEstimate> estimates;
    std::vector<Hyperparams> hyperparams;
    double next_omega = 0.0;
};

struct SelectionResult {
    std::string target_id;
    std::vector<std::string> source_ids;
    FrequencyRange search_range{0.0, 1.0};
    /// Sample frequencies shared by every source, in sampling order.
    std::vector<double> omegas;
    /// psi[n][m]: chordal distance of source n at omegas[m].
    std::vector<std::vector<double>> psi;
    std::vector<GPModel> models;
    std::vector<IterationRecord> history;
    std::vector<SimilarityEstimate> estimates;
    std::size_t chosen = 0;
    bool converged = false;
    int iterations = 0;

    const std::string& chosen_id() const { return source_ids.at(chosen); }
};

/// EI for maximization; zero when sigma is zero.
double expected_improvement(double mean, double sigma, double best, double xi_explore);

/// Grid maximum of the posterior mean over the band, clamped to [0, 1].
SimilarityEstimate similarity_estimate(const GPModel& model, const FrequencyRange& range, std::size_t grid_size,
                                       std::string source_id = {});

/// Guard on the estimate in the denominator of the multi-source acquisition.
inline constexpr double kSimilarityFloor = 1e-3;

/// argmax over the grid of max_n EI_n(w) / max(psi*_n, floor); ties go to the smaller frequency.
double multi_source_acquisition(std::span<const GPModel> models, std::span<const SimilarityEstimate> estimates,
                                const FrequencyRange& range, std::size_t grid_size, double xi_explore);

/// Band that the probe configuration can actually excite.
FrequencyRange effective_range(const FrequencyRange& range, const ProbeConfig& probe, double Ts);

/// z(w) of a black-box system, via an experiment or the analytic response per config.
ComplexResponse measure_response(const ClosedLoopSystem& system, double omega, const ProbeConfig& probe,
                                 std::uint64_t seed);

/// Sequential search for the worst-case chordal distance of every source, then argmin selection.
SelectionResult run_selection(const NamedSystem& target, std::span<const NamedSystem> sources,
                              const SelectionConfig& config);

/// Index of the smallest estimate; ties go to the lower index.
std::size_t select_source(std::span<const double> psi_star);

} // namespace nugap

#endif // NUGAP_BO_SELECT_HPP
