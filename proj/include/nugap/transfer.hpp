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
#ifndef NUGAP_TRANSFER_HPP
#define NUGAP_TRANSFER_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nugap/bo_select.hpp"
#include "nugap/gp.hpp"
#include "nugap/lti.hpp"
#include "nugap/trajectories.hpp"

namespace nugap {

/**
 * Maps a desired output stream to the reference that produces it.
 *
 * The exact inverse of a closed loop with relative degree rho is the recursion
 *
 *   num[rho] r(k) = sum_i den[i] y(k+rho-i) - sum_{i>rho} num[i] r(k+rho-i)
 *
 * run from rest. It is causal in y(k+rho), so it is evaluated as a stream.
 */
class InverseModel {
public:
    class Stream {
    public:
        /// Feed y(k+rho), get r(k).
        double push(double future_output);
        void reset();

    private:
        friend class InverseModel;
        explicit Stream(const InverseModel& model);

        int rho_;
        std::vector<double> num_;
        std::vector<double> den_;
        std::deque<double> outputs_;
        std::deque<double> references_;
    };

    /// gamma = y_d(k+rho).
    static InverseModel passthrough(int relative_degree, std::string provenance = "none");

    const std::string& provenance() const { return provenance_; }
    int relative_degree() const { return rho_; }
    bool is_passthrough() const { return num_.empty(); }
    Stream stream() const { return Stream(*this); }
    /// r(k) for k < desired.size(); the last desired value is held past the end.
    std::vector<double> apply(std::span<const double> desired) const;

private:
    friend InverseModel analytic_inverse(const StateSpaceModel&, std::string);
    InverseModel() = default;

    std::string provenance_;
    int rho_ = 0;
    std::vector<double> num_;
    std::vector<double> den_;
};

/// Exact inverse; refuses loops whose inverse would be unstable.
InverseModel analytic_inverse(const StateSpaceModel& closed_loop, std::string provenance = "exact-target");

/// FIFO training set for the online inverse model.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity);

    void push(const Eigen::VectorXd& input, double target);
    std::size_t size() const { return targets_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t evicted() const { return evicted_; }
    bool empty() const { return targets_.empty(); }
    /// Oldest first, one row per point.
    Eigen::MatrixXd inputs() const;
    Eigen::VectorXd targets() const;

private:
    std::size_t capacity_;
    std::size_t evicted_ = 0;
    std::deque<Eigen::VectorXd> inputs_;
    std::deque<double> targets_;
};

/// (y(i), (y(i) - y(i-1)) / Ts, (y(i) - 2 y(i-1) + y(i-2)) / Ts^2) with y = 0 before the start.
Eigen::VectorXd inverse_features(std::span<const double> y, long index, double Ts);

struct TrackingConfig {
    std::size_t window = 50;
    Hyperparams hp0{0.1, 0.5, 0.002};
    HyperBounds bounds{{1e-4, 10.0}, {1e-3, 100.0}, {1e-8, 1.0}};
    /// Steps between evidence maximizations, 0 to keep hp0.
    int reoptimize_every = 25;
    int n_restarts = 1;
    int max_evaluations = 200;
    double noise_std = 0.0;

    void validate() const;
};

struct TrackingLog {
    std::string trajectory_id;
    std::string prior;
    std::vector<double> desired;
    std::vector<double> reference;
    /// True (noise-free) output.
    std::vector<double> actual;
    std::vector<std::size_t> window_size;
    /// GP contribution on top of the prior.
    std::vector<double> correction;
    double rms = 0.0;
    int fit_failures = 0;
};

double rms_error(std::span<const double> desired, std::span<const double> actual);

/// Reference = desired, no inverse module.
TrackingLog baseline_tracking(const ClosedLoopSystem& target, const Trajectory& trajectory);

/// Prior inverse plus a GP correction learned online from the last `window` observations.
TrackingLog online_inverse_tracking(const ClosedLoopSystem& target, const InverseModel& prior,
                                    const Trajectory& trajectory, const TrackingConfig& config, std::uint64_t seed);

struct StudyConfig {
    TrackingConfig tracking;
    std::uint64_t seed = 0;
};

struct StudyCell {
    std::string source_id;
    std::string trajectory_id;
    double baseline_rms = 0.0;
    double rms = 0.0;
    double reduction_pct = 0.0;

    bool operator==(const StudyCell&) const = default;
};

struct StudyRow {
    std::string source_id;
    /// Empty for the no-transfer control.
    std::optional<double> psi_star_hat;
    double mean_rms = 0.0;
    double mean_reduction_pct = 0.0;

    bool operator==(const StudyRow&) const = default;
};

inline constexpr const char* kNoTransferId = "none";

struct StudyReport {
    std::string target_id;
    std::vector<std::string> trajectory_ids;
    std::vector<double> baseline_rms;
    /// Sources in selection order, then the no-transfer control.
    std::vector<StudyRow> rows;
    std::vector<StudyCell> cells;
    /// Between psi*_n and mean RMS over sources; empty when undefined.
    std::optional<double> spearman;
    std::string selected_id;
    std::string best_transfer_id;

    bool operator==(const StudyReport&) const = default;
};

/// Rank correlation with average ranks for ties; empty when either side is constant.
std::optional<double> spearman_correlation(std::span<const double> x, std::span<const double> y);

StudyReport run_transfer_study(const NamedSystem& target, std::span<const NamedSystem> sources,
                               std::span<const Trajectory> trajectories, const SelectionResult& selection,
                               const StudyConfig& config);

} // namespace nugap

#endif // NUGAP_TRANSFER_HPP
