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
#include "nugap/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "nugap/errors.hpp"
#include "seeding.hpp"

namespace nugap {

InverseModel::Stream::Stream(const InverseModel& model)
    : rho_(model.rho_), num_(model.num_), den_(model.den_) {
    reset();
}

void InverseModel::Stream::reset() {
    if (num_.empty()) return;
    const std::size_t n = den_.size() - 1;
    outputs_.assign(n + 1, 0.0);
    references_.assign(n - static_cast<std::size_t>(rho_), 0.0);
}

double InverseModel::Stream::push(double future_output) {
    if (num_.empty()) return future_output;
    outputs_.push_front(future_output);
    outputs_.pop_back();
    const std::size_t n = den_.size() - 1;
    const auto rho = static_cast<std::size_t>(rho_);
    double acc = 0.0;
    for (std::size_t i = 0; i <= n; ++i) acc += den_[i] * outputs_[i];
    for (std::size_t i = rho + 1; i <= n; ++i) acc -= num_[i] * references_[i - rho - 1];
    const double r = acc / num_[rho];
    if (!references_.empty()) {
        references_.push_front(r);
        references_.pop_back();
    }
    return r;
}

InverseModel InverseModel::passthrough(int relative_degree, std::string provenance) {
    if (relative_degree < 0) throw ConfigError("relative degree must be non-negative");
    InverseModel m;
    m.provenance_ = std::move(provenance);
    m.rho_ = relative_degree;
    return m;
}

std::vector<double> InverseModel::apply(std::span<const double> desired) const {
    std::vector<double> out(desired.size());
    auto s = stream();
    const auto n = static_cast<long>(desired.size());
    for (long k = 0; k < n; ++k) {
        const long i = k + rho_;
        out[static_cast<std::size_t>(k)] = s.push(desired[static_cast<std::size_t>(std::min(i, n - 1))]);
    }
    return out;
}

InverseModel analytic_inverse(const StateSpaceModel& closed_loop, std::string provenance) {
    const int rho = relative_degree(closed_loop);
    if (!check_minimum_phase(closed_loop)) {
        std::string where;
        for (const auto& z : zeros(closed_loop))
            if (std::abs(z) >= 1.0) where += fmt::format(" {:.6g}{:+.6g}j", z.real(), z.imag());
        for (const auto& p : poles(closed_loop))
            if (std::abs(p) > 1.0 + 1e-9) where += fmt::format(" pole {:.6g}{:+.6g}j", p.real(), p.imag());
        throw NumericalError(fmt::format("'{}' is not minimum phase, its inverse is unstable (outside the unit circle:{})",
                                         provenance, where));
    }
    const auto tf = transfer_function(closed_loop);
    InverseModel m;
    m.provenance_ = std::move(provenance);
    m.rho_ = rho;
    m.num_ = tf.num;
    m.den_ = tf.den;
    if (m.num_.empty()) {
        // Static gain.
        m.num_ = {closed_loop.D};
        m.den_ = {1.0};
    }
    return m;
}

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("window must hold at least one point");
}

void SlidingWindow::push(const Eigen::VectorXd& input, double target) {
    if (!inputs_.empty() && input.size() != inputs_.front().size())
        throw ConfigError("window inputs must share one dimension");
    inputs_.push_back(input);
    targets_.push_back(target);
    if (targets_.size() > capacity_) {
        inputs_.pop_front();
        targets_.pop_front();
        ++evicted_;
    }
}

Eigen::MatrixXd SlidingWindow::inputs() const {
    if (inputs_.empty()) return {};
    Eigen::MatrixXd out(static_cast<Eigen::Index>(inputs_.size()), inputs_.front().size());
    for (std::size_t i = 0; i < inputs_.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = inputs_[i].transpose();
    return out;
}

Eigen::VectorXd SlidingWindow::targets() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(targets_.size()));
    for (std::size_t i = 0; i < targets_.size(); ++i) out(static_cast<Eigen::Index>(i)) = targets_[i];
    return out;
}

Eigen::VectorXd inverse_features(std::span<const double> y, long index, double Ts) {
    auto at = [&](long i) { return i < 0 ? 0.0 : y[static_cast<std::size_t>(i)]; };
    const double y0 = at(index);
    const double y1 = at(index - 1);
    const double y2 = at(index - 2);
    Eigen::VectorXd f(3);
    f << y0, (y0 - y1) / Ts, (y0 - 2.0 * y1 + y2) / (Ts * Ts);
    return f;
}

void TrackingConfig::validate() const {
    if (window < 2) throw ConfigError("tracking window must be at least 2");
    hp0.validate();
    bounds.validate();
    if (reoptimize_every < 0) throw ConfigError("reoptimize_every must be non-negative");
    if (n_restarts < 1) throw ConfigError("n_restarts must be positive");
    if (max_evaluations < 1) throw ConfigError("max_evaluations must be positive");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be non-negative");
}

double rms_error(std::span<const double> desired, std::span<const double> actual) {
    if (desired.size() != actual.size()) throw ConfigError("RMS needs sequences of equal length");
    if (desired.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < desired.size(); ++k) acc += (desired[k] - actual[k]) * (desired[k] - actual[k]);
    return std::sqrt(acc / static_cast<double>(desired.size()));
}

namespace {

void check_trajectory(const ClosedLoopSystem& target, const Trajectory& trajectory) {
    if (trajectory.samples.empty()) throw ConfigError(fmt::format("trajectory '{}' is empty", trajectory.id));
    if (std::abs(trajectory.Ts - target.Ts()) > 1e-12 * target.Ts())
        throw ConfigError(fmt::format("trajectory '{}' sampled at {} s, system at {} s", trajectory.id, trajectory.Ts,
                                      target.Ts()));
    for (double y : trajectory.samples)
        if (!std::isfinite(y)) throw ConfigError(fmt::format("trajectory '{}' has non-finite samples", trajectory.id));
}

} // namespace

TrackingLog baseline_tracking(const ClosedLoopSystem& target, const Trajectory& trajectory) {
    check_trajectory(target, trajectory);
    ClosedLoopSystem sys = target;
    sys.reset();
    TrackingLog log;
    log.trajectory_id = trajectory.id;
    log.prior = "baseline";
    log.desired = trajectory.samples;
    log.reference = trajectory.samples;
    log.actual.reserve(log.desired.size());
    for (double r : log.reference) log.actual.push_back(sys.step(r));
    log.window_size.assign(log.desired.size(), 0);
    log.correction.assign(log.desired.size(), 0.0);
    log.rms = rms_error(log.desired, log.actual);
    return log;
}

TrackingLog online_inverse_tracking(const ClosedLoopSystem& target, const InverseModel& prior,
                                    const Trajectory& trajectory, const TrackingConfig& config, std::uint64_t seed) {
    config.validate();
    check_trajectory(target, trajectory);
    const std::size_t n = trajectory.samples.size();
    if (n < 10 * config.window)
        throw ConfigError(fmt::format("trajectory '{}' has {} samples, need at least 10 x window = {}", trajectory.id,
                                      n, 10 * config.window));
    const int rho = relative_degree(target.model());
    if (prior.relative_degree() != rho)
        throw ConfigError(fmt::format("prior '{}' has relative degree {}, target {}", prior.provenance(),
                                      prior.relative_degree(), rho));

    const double Ts = target.Ts();
    ClosedLoopSystem sys = target;
    sys.reset();
    std::mt19937_64 noise_rng(detail::derive_seed(seed, 0, 0));
    std::normal_distribution<double> noise(0.0, 1.0);

    // Desired output as the loop can realize it: zero for the first rho samples, held after the end.
    std::vector<double> desired(n + static_cast<std::size_t>(rho) + 1);
    for (std::size_t i = 0; i < desired.size(); ++i)
        desired[i] = i < static_cast<std::size_t>(rho) ? 0.0 : trajectory.samples[std::min(i, n - 1)];

    auto query = prior.stream();
    auto observed = prior.stream();
    SlidingWindow window(config.window);
    Hyperparams hp = config.hp0;
    std::optional<GPModel> gp;

    TrackingLog log;
    log.trajectory_id = trajectory.id;
    log.prior = prior.provenance();
    log.desired = trajectory.samples;
    log.reference.reserve(n);
    log.actual.reserve(n);
    log.window_size.reserve(n);
    log.correction.reserve(n);
    std::vector<double> measured;
    measured.reserve(n);

    auto observe = [&](std::size_t k, double y) {
        const double noisy = config.noise_std > 0.0 ? y + config.noise_std * noise(noise_rng) : y;
        measured.push_back(noisy);
        if (k < static_cast<std::size_t>(rho)) return;
        // The prior's reference for what was actually observed; the GP learns what it missed.
        const double replay = observed.push(noisy);
        window.push(inverse_features(measured, static_cast<long>(k), Ts), log.reference[k - rho] - replay);

        if (config.reoptimize_every > 0 && k > 0 && k % static_cast<std::size_t>(config.reoptimize_every) == 0 &&
            window.size() >= 2) {
            try {
                HyperSearch search;
                search.n_restarts = config.n_restarts;
                search.max_evaluations = config.max_evaluations;
                search.seed = detail::derive_seed(seed, 1, k);
                search.initial = hp;
                hp = optimize_hyperparameters(window.inputs(), window.targets(), zero_mean(), config.bounds, search);
            } catch (const NumericalError& e) {
                spdlog::debug("{} / {}: hyperparameter search failed at step {}: {}", trajectory.id,
                              prior.provenance(), k, e.what());
            }
        }
        try {
            gp = GPModel::fit(window.inputs(), window.targets(), zero_mean(), hp);
        } catch (const NumericalError& e) {
            gp.reset();
            ++log.fit_failures;
            spdlog::debug("{} / {}: GP fit failed at step {}, prior only: {}", trajectory.id, prior.provenance(), k,
                          e.what());
        }
    };

    for (std::size_t k = 0; k < n; ++k) {
        // With rho >= 1 the current output does not depend on the reference about to be sent.
        if (rho > 0) observe(k, sys.peek(0.0));
        const std::size_t ahead = k + static_cast<std::size_t>(rho);
        double correction = 0.0;
        if (gp) correction = gp->predict(inverse_features(desired, static_cast<long>(ahead), Ts)).mean;
        const double reference = query.push(desired[ahead]) + correction;
        log.reference.push_back(reference);
        log.correction.push_back(correction);
        log.window_size.push_back(window.size());
        log.actual.push_back(sys.step(reference));
        if (rho == 0) observe(k, log.actual.back());
    }
    log.rms = rms_error(log.desired, log.actual);
    return log;
}

std::optional<double> spearman_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ConfigError("rank correlation needs sequences of equal length");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    auto ranks = [n](std::span<const double> v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

StudyReport run_transfer_study(const NamedSystem& target, std::span<const NamedSystem> sources,
                               std::span<const Trajectory> trajectories, const SelectionResult& selection,
                               const StudyConfig& config) {
    if (trajectories.empty()) throw ConfigError("transfer study needs at least one trajectory");
    if (sources.empty()) throw ConfigError("transfer study needs at least one source");
    config.tracking.validate();
    if (selection.source_ids.size() != sources.size())
        throw ConfigError(fmt::format("selection covers {} sources, study has {}", selection.source_ids.size(),
                                      sources.size()));
    for (std::size_t i = 0; i < sources.size(); ++i)
        if (selection.source_ids[i] != sources[i].name)
            throw ConfigError(fmt::format("selection source {} is '{}', study source is '{}'", i,
                                          selection.source_ids[i], sources[i].name));
    if (selection.estimates.size() != sources.size()) throw ConfigError("selection has no estimate per source");

    const int rho = relative_degree(target.system.model());
    std::vector<InverseModel> priors;
    for (const auto& s : sources) {
        priors.push_back(analytic_inverse(s.system.model(), s.name));
        if (priors.back().relative_degree() != rho)
            throw ConfigError(fmt::format("source '{}' has relative degree {}, target '{}' has {}", s.name,
                                          priors.back().relative_degree(), target.name, rho));
    }
    priors.push_back(InverseModel::passthrough(rho, kNoTransferId));

    StudyReport report;
    report.target_id = target.name;
    for (const auto& t : trajectories) {
        report.trajectory_ids.push_back(t.id);
        report.baseline_rms.push_back(baseline_tracking(target.system, t).rms);
    }

    for (std::size_t p = 0; p < priors.size(); ++p) {
        StudyRow row;
        row.source_id = priors[p].provenance();
        if (p < sources.size()) row.psi_star_hat = selection.estimates[p].psi_star;
        for (std::size_t j = 0; j < trajectories.size(); ++j) {
            const auto log = online_inverse_tracking(target.system, priors[p], trajectories[j], config.tracking,
                                                     detail::derive_seed(config.seed, 100 + p, j));
            StudyCell cell{row.source_id, trajectories[j].id, report.baseline_rms[j], log.rms, 0.0};
            if (cell.baseline_rms > 0.0) cell.reduction_pct = 100.0 * (1.0 - cell.rms / cell.baseline_rms);
            row.mean_rms += cell.rms;
            row.mean_reduction_pct += cell.reduction_pct;
            report.cells.push_back(std::move(cell));
        }
        row.mean_rms /= static_cast<double>(trajectories.size());
        row.mean_reduction_pct /= static_cast<double>(trajectories.size());
        spdlog::info("transfer {} -> {}: mean RMS {:.4g}, mean reduction {:.1f}%", row.source_id, target.name,
                     row.mean_rms, row.mean_reduction_pct);
        report.rows.push_back(std::move(row));
    }

    std::vector<double> psi;
    std::vector<double> rms;
    std::size_t best = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        psi.push_back(*report.rows[i].psi_star_hat);
        rms.push_back(report.rows[i].mean_rms);
        if (rms[i] < rms[best]) best = i;
    }
    report.spearman = spearman_correlation(psi, rms);
    report.selected_id = selection.chosen_id();
    report.best_transfer_id = sources[best].name;
    return report;
}

} // namespace nugap
